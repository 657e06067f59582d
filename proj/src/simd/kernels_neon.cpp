#include "wg/simd/kernels.hpp"

#include <arm_neon.h>

#include <cmath>
#include <limits>

// NEON variants. The exponential stays scalar here; only the linear kernels
// are vectorized.
namespace wg::simd {
namespace {

void add_scalar(double* dst, const double* src, double c, std::size_t n) {
    const float64x2_t vc = vdupq_n_f64(c);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(dst + i, vaddq_f64(vld1q_f64(src + i), vc));
    for (; i < n; ++i) dst[i] = src[i] + c;
}

void add(double* dst, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(dst + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    for (; i < n; ++i) dst[i] = a[i] + b[i];
}

double min_value(const double* x, std::size_t n) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        if (x[i] < m) m = x[i];
    return m;
}

double sum_exp_shifted(const double* x, std::size_t n, double shift) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::exp(shift - x[i]);
    return s;
}

void vecmat(const double* v, const double* m, double* out, std::size_t rows,
            std::size_t cols) {
    for (std::size_t j = 0; j < cols; ++j) out[j] = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        const float64x2_t vi = vdupq_n_f64(v[i]);
        const double* row = m + i * cols;
        std::size_t j = 0;
        for (; j + 2 <= cols; j += 2)
            vst1q_f64(out + j, vaddq_f64(vld1q_f64(out + j), vmulq_f64(vi, vld1q_f64(row + j))));
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
        for (; k + 2 <= inner; k += 2) {
            float64x2_t acc = vdupq_n_f64(0.0);
            for (std::size_t v = 0; v < nw; ++v)
                acc = vaddq_f64(acc, vmulq_f64(vdupq_n_f64(w[v]), vld1q_f64(base + v * inner + k)));
            vst1q_f64(d + k, acc);
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
            for (; k + 2 <= inner; k += 2) {
                float64x2_t a = vld1q_f64(s + k);
                float64x2_t b = vld1q_f64(r + k);
                vst1q_f64(s + k, Subtract ? vsubq_f64(a, b) : vaddq_f64(a, b));
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

const KernelTable& neon_kernel_table() {
    static const KernelTable table{"neon",          add_scalar,   add,
                                   min_value,       sum_exp_shifted, vecmat,
                                   axis_weighted_sum, axis_subtract, axis_add};
    return table;
}

}  // namespace wg::simd
