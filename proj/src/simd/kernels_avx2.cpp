#include "wg/simd/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <limits>

namespace wg::simd {
namespace {

// Cephes-style exp on 4 lanes. Arguments below -708 flush to zero.
inline __m256d exp4(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
    const __m256d c1 = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d c2 = _mm256_set1_pd(1.42860682030941723212e-6);
    const __m256d lo = _mm256_set1_pd(-708.0);
    const __m256d hi = _mm256_set1_pd(709.0);

    __m256d under = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
    x = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

    __m256d n = _mm256_floor_pd(_mm256_add_pd(_mm256_mul_pd(x, log2e), _mm256_set1_pd(0.5)));
    __m256d r = _mm256_sub_pd(x, _mm256_mul_pd(n, c1));
    r = _mm256_sub_pd(r, _mm256_mul_pd(n, c2));

    __m256d rr = _mm256_mul_pd(r, r);
    __m256d p = _mm256_set1_pd(1.26177193074810590878e-4);
    p = _mm256_add_pd(_mm256_mul_pd(p, rr), _mm256_set1_pd(3.02994407707441961300e-2));
    p = _mm256_add_pd(_mm256_mul_pd(p, rr), _mm256_set1_pd(9.99999999999999999910e-1));
    p = _mm256_mul_pd(p, r);
    __m256d q = _mm256_set1_pd(3.00198505138664455042e-6);
    q = _mm256_add_pd(_mm256_mul_pd(q, rr), _mm256_set1_pd(2.52448340349684104192e-3));
    q = _mm256_add_pd(_mm256_mul_pd(q, rr), _mm256_set1_pd(2.27265548208155028766e-1));
    q = _mm256_add_pd(_mm256_mul_pd(q, rr), _mm256_set1_pd(2.00000000000000000009e0));
    __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
    e = _mm256_add_pd(_mm256_set1_pd(1.0), _mm256_add_pd(e, e));

    // 2^n through the exponent field
    __m128i ni = _mm256_cvtpd_epi32(n);
    __m256i n64 = _mm256_cvtepi32_epi64(ni);
    n64 = _mm256_add_epi64(n64, _mm256_set1_epi64x(1023));
    __m256d scale = _mm256_castsi256_pd(_mm256_slli_epi64(n64, 52));
    e = _mm256_mul_pd(e, scale);
    return _mm256_andnot_pd(under, e);
}

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

void add_scalar(double* dst, const double* src, double c, std::size_t n) {
    const __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(src + i), vc));
    for (; i < n; ++i) dst[i] = src[i] + c;
}

void add(double* dst, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(dst + i,
                         _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) dst[i] = a[i] + b[i];
}

double min_value(const double* x, std::size_t n) {
    double m = std::numeric_limits<double>::infinity();
    std::size_t i = 0;
    if (n >= 4) {
        __m256d vm = _mm256_set1_pd(m);
        for (; i + 4 <= n; i += 4) vm = _mm256_min_pd(vm, _mm256_loadu_pd(x + i));
        alignas(32) double lanes[4];
        _mm256_store_pd(lanes, vm);
        for (double l : lanes)
            if (l < m) m = l;
    }
    for (; i < n; ++i)
        if (x[i] < m) m = x[i];
    return m;
}

double sum_exp_shifted(const double* x, std::size_t n, double shift) {
    const __m256d vs = _mm256_set1_pd(shift);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, exp4(_mm256_sub_pd(vs, _mm256_loadu_pd(x + i))));
    double s = hsum(acc);
    for (; i < n; ++i) s += std::exp(shift - x[i]);
    return s;
}

void vecmat(const double* v, const double* m, double* out, std::size_t rows,
            std::size_t cols) {
    for (std::size_t j = 0; j < cols; ++j) out[j] = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        const __m256d vi = _mm256_set1_pd(v[i]);
        const double* row = m + i * cols;
        std::size_t j = 0;
        for (; j + 4 <= cols; j += 4) {
            __m256d o = _mm256_loadu_pd(out + j);
            o = _mm256_add_pd(o, _mm256_mul_pd(vi, _mm256_loadu_pd(row + j)));
            _mm256_storeu_pd(out + j, o);
        }
        for (; j < cols; ++j) out[j] = out[j] + v[i] * row[j];
    }
}

void axis_weighted_sum(double* data, std::size_t outer, std::size_t slots,
                       std::size_t inner, const double* w, std::size_t nw,
                       std::size_t dst) {
    for (std::size_t o = 0; o < outer; ++o) {
        double* base = data + o * slots * inner;
        double* d = base + dst * inner;
        std::size_t k = 0;
        for (; k + 4 <= inner; k += 4) {
            __m256d acc = _mm256_setzero_pd();
            for (std::size_t v = 0; v < nw; ++v)
                acc = _mm256_add_pd(
                    acc, _mm256_mul_pd(_mm256_set1_pd(w[v]),
                                       _mm256_loadu_pd(base + v * inner + k)));
            _mm256_storeu_pd(d + k, acc);
        }
        for (; k < inner; ++k) {
            double acc = 0.0;
            for (std::size_t v = 0; v < nw; ++v) acc = acc + w[v] * base[v * inner + k];
            d[k] = acc;
        }
    }
}

template <bool Subtract>
void axis_combine(double* data, std::size_t outer, std::size_t slots,
                  std::size_t inner, std::size_t ref) {
    for (std::size_t o = 0; o < outer; ++o) {
        double* base = data + o * slots * inner;
        const double* r = base + ref * inner;
        for (std::size_t v = 0; v < slots; ++v) {
            if (v == ref) continue;
            double* s = base + v * inner;
            std::size_t k = 0;
            for (; k + 4 <= inner; k += 4) {
                __m256d a = _mm256_loadu_pd(s + k);
                __m256d b = _mm256_loadu_pd(r + k);
                _mm256_storeu_pd(s + k, Subtract ? _mm256_sub_pd(a, b) : _mm256_add_pd(a, b));
            }
            for (; k < inner; ++k) {
                if constexpr (Subtract)
                    s[k] -= r[k];
                else
                    s[k] += r[k];
            }
        }
    }
}

void axis_subtract(double* data, std::size_t outer, std::size_t slots,
                   std::size_t inner, std::size_t ref) {
    axis_combine<true>(data, outer, slots, inner, ref);
}

void axis_add(double* data, std::size_t outer, std::size_t slots,
              std::size_t inner, std::size_t ref) {
    axis_combine<false>(data, outer, slots, inner, ref);
}

}  // namespace

const KernelTable& avx2_kernel_table() {
    static const KernelTable table{"avx2",          add_scalar,   add,
                                   min_value,       sum_exp_shifted, vecmat,
                                   axis_weighted_sum, axis_subtract, axis_add};
    return table;
}

}  // namespace wg::simd
