#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "wg/error.hpp"
#include "wg/quenched.hpp"

using namespace wg;

namespace {

DisorderConfig random_eta(std::mt19937_64& rng, std::size_t n, int radix) {
    DisorderConfig e(n);
    for (int& x : e) x = static_cast<int>(rng() % radix);
    return e;
}

std::vector<int> decode(std::size_t code, std::size_t n, int radix) {
    std::vector<int> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = static_cast<int>(code % radix);
        code /= radix;
    }
    return s;
}

}  // namespace

TEST_SUITE("quenched") {

TEST_CASE("partition function examples") {
    auto f = share(make_free_model(1));
    auto e1 = QuenchedEnsemble::make(f, Box::from_extents({1}), BoundaryCondition::free_bc(), {0});
    CHECK(log_partition(e1).log == doctest::Approx(std::log(2.0)).epsilon(1e-14));

    auto ising = share(make_rfim(1.0, 0.0, {1.0}, {1.0}, 1));
    auto pair = QuenchedEnsemble::make(ising, Box::from_extents({2}), BoundaryCondition::free_bc(), {0, 0});
    CHECK(log_partition(pair).log == doctest::Approx(std::log(4.0 * std::cosh(1.0))).epsilon(1e-14));
    CHECK(log_partition(pair).log == doctest::Approx(1.820078).epsilon(1e-6));

    auto rf = share(make_rfim(0.0, 0.7, {-1.0, 2.0}, {0.5, 0.5}, 1));
    auto site = QuenchedEnsemble::make(rf, Box::from_extents({1}), BoundaryCondition::free_bc(), {1});
    CHECK(log_partition(site).log == doctest::Approx(std::log(2.0 * std::cosh(1.4))).epsilon(1e-14));
}

TEST_CASE("probability and expectation examples") {
    auto f = share(make_free_model(2));
    auto u = QuenchedEnsemble::make(f, Box::from_extents({2, 2}), BoundaryCondition::free_bc(), {0, 1, 0, 1});
    CHECK(gibbs_probability(u, std::vector<int>{0, 1, 1, 0}) == doctest::Approx(1.0 / 16));

    const double h = 0.45;
    auto rf = share(make_rfim(0.0, h, {1.0}, {1.0}, 1));
    auto s = QuenchedEnsemble::make(rf, Box::from_extents({1}), BoundaryCondition::free_bc(), {0});
    CHECK(gibbs_probability(s, std::vector<int>{1}) ==
          doctest::Approx(std::exp(h) / (2 * std::cosh(h))).epsilon(1e-14));
    CHECK(magnetization(s, Site{0}) == doctest::Approx(std::tanh(h)).epsilon(1e-14));

    auto strong = share(make_rfim(5.0, 0.0, {1.0}, {1.0}, 1));
    auto p = QuenchedEnsemble::make(strong, Box::from_extents({2}), BoundaryCondition::free_bc(), {0, 0});
    const double aligned = gibbs_probability(p, std::vector<int>{1, 1}) + gibbs_probability(p, std::vector<int>{0, 0});
    CHECK(aligned >= 0.9999);

    const double J = 0.8;
    auto pj = share(make_rfim(J, 0.0, {1.0}, {1.0}, 1));
    auto pe = QuenchedEnsemble::make(pj, Box::from_extents({2}), BoundaryCondition::free_bc(), {0, 0});
    CHECK(expectation(pe, [](std::span<const int>) { return 3.5; }) == doctest::Approx(3.5));
    CHECK(expectation(pe, [](std::span<const int> s) { return (2.0 * s[0] - 1) * (2.0 * s[1] - 1); }) ==
          doctest::Approx(std::tanh(J)).epsilon(1e-14));
    CHECK(std::abs(magnetization(pe, Site{0})) < 1e-14);

    auto sym = share(make_rfim(0.6, 0.0, {1.0}, {1.0}, 2));
    auto se = QuenchedEnsemble::make(sym, Box::from_extents({3, 3}), BoundaryCondition::free_bc(),
                                     DisorderConfig(9, 0));
    CHECK(std::abs(magnetization(se, Site{1, 1})) < 1e-13);

    ModelParams pp;
    pp.name = "potts";
    pp.dim = 1;
    pp.spin_values = {0, 1, 2};
    pp.disorder_values = {{{0.0}}};
    pp.nu = {1.0};
    auto potts = share(ModelSpec(pp));
    auto pe3 = QuenchedEnsemble::make(potts, Box::from_extents({2}), BoundaryCondition::free_bc(), {0, 0});
    CHECK_THROWS_AS(magnetization(pe3, Site{0}), DomainError);
}

TEST_CASE("probabilities normalize") {
    std::mt19937_64 rng(4);
    std::vector<ModelPtr> models = {share(make_rfim(0.7, 0.9, {-1.0, 1.0}, {0.5, 0.5}, 2)),
                                    share(make_dilute(1.3, 0.6, 2)),
                                    share(make_random_bond({{{-0.9, 0.4}, {0.5, 0.5}}, {{0.2, 1.1}, {0.3, 0.7}}}))};
    for (const auto& m : models) {
        for (auto bc : {BoundaryCondition::free_bc(), BoundaryCondition::uniform(1), BoundaryCondition::uniform(0)}) {
            Box b = Box::from_extents({3, 3});
            auto ens = QuenchedEnsemble::make(m, b, bc, random_eta(rng, 9, m->disorder_radix()));
            double total = 0.0;
            for (std::size_t c = 0; c < 512; ++c) total += gibbs_probability(ens, decode(c, 9, 2));
            CHECK(std::abs(total - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("blocked enumeration matches plain Gray walk") {
    std::mt19937_64 rng(8);
    auto m = share(make_rfim(0.9, 1.3, {-1.0, 0.3, 1.0}, {0.3, 0.3, 0.4}, 2));
    for (auto ext : std::vector<std::vector<int>>{{3, 3}, {4, 4}, {3, 5}, {2, 8}}) {
        Box b = Box::from_extents(ext);
        auto ens = QuenchedEnsemble::make(m, b, BoundaryCondition::uniform(1), random_eta(rng, b.size(), 3));
        const double a = log_partition_enumerate(ens.energy_model());
        const double g = log_partition_gray(ens.energy_model());
        CHECK(std::abs(a - g) <= 1e-12 * std::abs(g));
    }
}

TEST_CASE("non-quadratic Hamiltonian uses the generic walk") {
    // three-body plaquette term plus a three-state spin
    ModelParams p;
    p.name = "triple";
    p.dim = 1;
    p.spin_values = {-1, 0, 1};
    p.disorder_values = {{{0.5}}, {{-0.25}}};
    p.nu = {0.5, 0.5};
    TermShape t;
    t.name = "triple";
    t.offsets = {Site{0}, Site{1}, Site{2}};
    t.uses_disorder = {true, false, false};
    std::vector<int> sv = p.spin_values;
    std::vector<double> dv{0.5, -0.25};
    t.energy = [sv, dv](std::span<const int> s, std::span<const int> e) {
        return dv[e[0]] * sv[s[0]] * sv[s[1]] * sv[s[2]] + 0.1 * sv[s[1]];
    };
    p.shapes = {t};
    auto m = share(ModelSpec(p));
    std::mt19937_64 rng(2);
    Box b = Box::from_extents({6});
    auto ens = QuenchedEnsemble::make(m, b, BoundaryCondition::uniform(2), random_eta(rng, 6, 2));
    // direct oracle
    LogSumExp acc;
    const auto full_eta = ens.layout().full_disorder(ens.eta());
    for (std::size_t c = 0; c < 729; ++c) {
        auto s = decode(c, 6, 3);
        auto fs = ens.layout().full_spins(s);
        double e = 0.0;
        for (const auto& inst : ens.layout().instances()) e += ens.layout().instance_energy(inst, fs, full_eta);
        acc.add(-e);
        CHECK(ens.energy(s) == doctest::Approx(e).epsilon(1e-13));
    }
    CHECK(log_partition(ens).log == doctest::Approx(acc.value()).epsilon(1e-12));
}

TEST_CASE("transfer matrix matches enumeration on chains and strips") {
    std::mt19937_64 rng(21);
    std::vector<ModelPtr> chain_models = {share(make_rfim(0.8, 0.6, {-1.0, 1.0}, {0.5, 0.5}, 1)),
                                          share(make_dilute(1.4, 0.5, 1)),
                                          share(make_random_bond({{{-0.7, 1.2}, {0.5, 0.5}}}))};
    for (const auto& m : chain_models)
        for (int len = 2; len <= 14; ++len)
            for (auto bc : {BoundaryCondition::free_bc(), BoundaryCondition::uniform(1)}) {
                Box b = Box::from_extents({len});
                auto ens = QuenchedEnsemble::make(m, b, bc, random_eta(rng, b.size(), m->disorder_radix()));
                REQUIRE(transfer_applicable(ens.energy_model(), b));
                const double tm = log_partition_transfer(ens.energy_model(), b);
                const double en = log_partition_enumerate(ens.energy_model());
                CHECK(std::abs(tm - en) <= 1e-10 * std::abs(en));
            }
    auto m2 = share(make_rfim(0.5, 0.8, {-1.0, 1.0}, {0.5, 0.5}, 2));
    for (auto ext : std::vector<std::vector<int>>{{4, 3}, {3, 6}, {5, 4}}) {
        Box b = Box::from_extents(ext);
        auto ens = QuenchedEnsemble::make(m2, b, BoundaryCondition::uniform(0), random_eta(rng, b.size(), 2));
        const double tm = log_partition_transfer(ens.energy_model(), b);
        const double en = log_partition_enumerate(ens.energy_model());
        CHECK(std::abs(tm - en) <= 1e-10 * std::abs(en));
    }
    Box wide = Box::from_extents({7, 7});
    auto big = QuenchedEnsemble::make(m2, wide, BoundaryCondition::free_bc(), DisorderConfig(49, 0));
    CHECK(!transfer_applicable(big.energy_model(), wide));
    CHECK_THROWS_AS(log_partition(big), CapExceeded);
}

TEST_CASE("DLR consistency on sub-boxes") {
    std::mt19937_64 rng(13);
    std::vector<ModelPtr> models = {share(make_rfim(0.7, 0.5, {-1.0, 1.0}, {0.5, 0.5}, 2)),
                                    share(make_dilute(1.1, 0.5, 2))};
    Box big = Box::from_extents({3, 3});
    std::vector<Box> subs = {Box(Site{1, 1}, Site{1, 1}), Box(Site{0, 0}, Site{1, 1}),
                             Box(Site{0, 1}, Site{2, 1}), Box(Site{2, 0}, Site{2, 2})};
    for (const auto& m : models)
        for (auto bc : {BoundaryCondition::free_bc(), BoundaryCondition::uniform(1)}) {
            DisorderConfig eta = random_eta(rng, 9, 2);
            auto ens = QuenchedEnsemble::make(m, big, bc, eta);
            for (const Box& sub : subs) {
                const std::size_t ns = sub.size();
                std::vector<std::size_t> in_sub, out_sub;
                for (std::size_t i = 0; i < 9; ++i)
                    (sub.contains(big.site_at(i)) ? in_sub : out_sub).push_back(i);
                std::map<std::vector<int>, double> marginal, mixed;
                for (std::size_t c = 0; c < 512; ++c) {
                    auto s = decode(c, 9, 2);
                    std::vector<int> inner;
                    for (std::size_t i : in_sub) inner.push_back(s[i]);
                    marginal[inner] += gibbs_probability(ens, s);
                }
                // conditional kernel of the sub-box given the outside spins
                for (std::size_t c = 0; c < (std::size_t{1} << out_sub.size()); ++c) {
                    auto so = decode(c, out_sub.size(), 2);
                    BoundaryCondition sbc = bc;
                    DisorderConfig seta(ns);
                    for (std::size_t k = 0; k < out_sub.size(); ++k) {
                        sbc.spins[big.site_at(out_sub[k])] = so[k];
                        sbc.disorder[big.site_at(out_sub[k])] = eta[out_sub[k]];
                    }
                    for (std::size_t k = 0; k < ns; ++k) seta[k] = eta[in_sub[k]];
                    auto cond = QuenchedEnsemble::make(m, sub, sbc, seta);
                    double p_out = 0.0;
                    for (std::size_t ci = 0; ci < (std::size_t{1} << ns); ++ci) {
                        auto si = decode(ci, ns, 2);
                        std::vector<int> s(9);
                        for (std::size_t k = 0; k < ns; ++k) s[in_sub[k]] = si[k];
                        for (std::size_t k = 0; k < out_sub.size(); ++k) s[out_sub[k]] = so[k];
                        p_out += gibbs_probability(ens, s);
                    }
                    for (std::size_t ci = 0; ci < (std::size_t{1} << ns); ++ci) {
                        auto si = decode(ci, ns, 2);
                        mixed[si] += p_out * gibbs_probability(cond, si);
                    }
                }
                for (auto& [k, v] : marginal) CHECK(std::abs(mixed[k] - v) <= 1e-12);
            }
        }
}

TEST_CASE("RFIM magnetization is monotone on 3x3") {
    const double J = 0.6, h = 0.8;
    auto m = share(make_rfim(J, h, {-1.0, 1.0}, {0.5, 0.5}, 2));
    Box b = Box::from_extents({3, 3});
    for (auto bc : {BoundaryCondition::free_bc(), BoundaryCondition::uniform(1), BoundaryCondition::uniform(0)}) {
        std::vector<std::vector<double>> mags(512);
        auto layout = std::make_shared<const Layout>(m, b, bc);
        for (std::size_t p = 0; p < 512; ++p) {
            QuenchedEnsemble ens(layout, decode(p, 9, 2));
            std::vector<std::function<double(std::span<const int>)>> obs;
            for (int i = 0; i < 9; ++i) obs.push_back([i](std::span<const int> s) { return 2.0 * s[i] - 1.0; });
            mags[p] = expectations(ens, obs);
        }
        for (std::size_t p = 0; p < 512; ++p)
            for (int y = 0; y < 9; ++y) {
                if (p >> y & 1U) continue;
                const std::size_t q = p | (std::size_t{1} << y);
                for (int x = 0; x < 9; ++x) CHECK(mags[q][x] >= mags[p][x] - 1e-12);
            }
    }
}

}  // TEST_SUITE
