#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "wg/simd/kernels.hpp"

using namespace wg::simd;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
}

std::vector<const KernelTable*> variants() {
    std::vector<const KernelTable*> out;
    if (auto* k = avx2_kernels()) out.push_back(k);
    if (auto* k = neon_kernels()) out.push_back(k);
    return out;
}

}  // namespace

TEST_SUITE("simd") {

TEST_CASE("dispatch reports the active table") {
    const KernelTable& k = kernels();
    CHECK(k.name != nullptr);
    auto names = available_kernel_sets();
    CHECK(names.front() == "scalar");
    bool listed = false;
    for (auto& n : names) listed = listed || n == k.name;
    CHECK(listed);
    MESSAGE("active kernels: " << k.name);
}

TEST_CASE("vector variants agree with the scalar reference") {
    const KernelTable& ref = scalar_kernels();
    std::mt19937_64 rng(99);
    for (const KernelTable* v : variants()) {
        for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 64u, 1000u, 4097u}) {
            auto a = random_vec(rng, n, -50, 50), b = random_vec(rng, n, -50, 50);
            std::vector<double> r1(n), r2(n);
            ref.add_scalar(r1.data(), a.data(), 0.37, n);
            v->add_scalar(r2.data(), a.data(), 0.37, n);
            CHECK(r1 == r2);
            ref.add(r1.data(), a.data(), b.data(), n);
            v->add(r2.data(), a.data(), b.data(), n);
            CHECK(r1 == r2);
            CHECK(ref.min_value(a.data(), n) == v->min_value(a.data(), n));

            const double shift = ref.min_value(a.data(), n);
            if (n) {
                const double s1 = ref.sum_exp_shifted(a.data(), n, shift);
                const double s2 = v->sum_exp_shifted(a.data(), n, shift);
                CHECK(std::abs(s1 - s2) <= 1e-14 * s1);
            }
        }
        // exp accuracy over the range used by the enumerator
        std::vector<double> x(2000);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = 750.0 * static_cast<double>(i) / x.size();
        for (std::size_t i = 0; i + 4 <= x.size(); i += 4) {
            const double s1 = ref.sum_exp_shifted(x.data() + i, 4, 0.0);
            const double s2 = v->sum_exp_shifted(x.data() + i, 4, 0.0);
            CHECK(std::abs(s1 - s2) <= 4e-16 * s1 + 1e-300);
        }

        for (std::size_t rows : {1u, 5u, 32u, 64u})
            for (std::size_t cols : {1u, 6u, 32u, 64u}) {
                auto vec = random_vec(rng, rows, 0, 1), mat = random_vec(rng, rows * cols, 0, 2);
                std::vector<double> o1(cols), o2(cols);
                ref.vecmat(vec.data(), mat.data(), o1.data(), rows, cols);
                v->vecmat(vec.data(), mat.data(), o2.data(), rows, cols);
                CHECK(o1 == o2);
            }

        for (std::size_t inner : {1u, 3u, 4u, 9u, 27u})
            for (std::size_t slots : {2u, 3u, 5u}) {
                const std::size_t outer = 7;
                auto data = random_vec(rng, outer * slots * inner, -3, 3);
                auto w = random_vec(rng, slots - 1, 0, 1);
                auto d1 = data, d2 = data;
                ref.axis_weighted_sum(d1.data(), outer, slots, inner, w.data(), slots - 1, slots - 1);
                v->axis_weighted_sum(d2.data(), outer, slots, inner, w.data(), slots - 1, slots - 1);
                CHECK(d1 == d2);
                ref.axis_subtract(d1.data(), outer, slots, inner, slots - 1);
                v->axis_subtract(d2.data(), outer, slots, inner, slots - 1);
                CHECK(d1 == d2);
                ref.axis_add(d1.data(), outer, slots, inner, 0);
                v->axis_add(d2.data(), outer, slots, inner, 0);
                CHECK(d1 == d2);
            }
    }
}

TEST_CASE("subset Moebius against the naive double sum") {
    std::mt19937_64 rng(3);
    for (unsigned nb : {0u, 1u, 3u, 6u, 10u}) {
        const std::size_t N = std::size_t{1} << nb;
        auto f = random_vec(rng, N, -1, 1);
        std::vector<double> naive(N, 0.0);
        for (std::size_t s = 0; s < N; ++s)
            for (std::size_t t = s;; t = (t - 1) & s) {
                const int sign = (__builtin_popcountll(s ^ t) & 1) ? -1 : 1;
                naive[s] += sign * f[t];
                if (t == 0) break;
            }
        auto g = f;
        subset_mobius(g.data(), nb);
        for (std::size_t s = 0; s < N; ++s) CHECK(g[s] == doctest::Approx(naive[s]).epsilon(1e-12));
        subset_zeta(g.data(), nb);
        for (std::size_t s = 0; s < N; ++s) CHECK(std::abs(g[s] - f[s]) <= 1e-12);
        auto h = f;
        subset_mobius(h.data(), nb, scalar_kernels());
        for (const KernelTable* v : variants()) {
            auto h2 = f;
            subset_mobius(h2.data(), nb, *v);
            CHECK(h == h2);
        }
    }
}

}  // TEST_SUITE
