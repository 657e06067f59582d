#include "wg/simd/kernels.hpp"

#include <cmath>
#include <limits>

namespace wg::simd {
namespace {

void add_scalar(double* dst, const double* src, double c, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = src[i] + c;
}

void add(double* dst, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] + b[i];
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
        const double vi = v[i];
        const double* row = m + i * cols;
        for (std::size_t j = 0; j < cols; ++j) out[j] = out[j] + vi * row[j];
    }
}

void axis_weighted_sum(double* data, std::size_t outer, std::size_t slots,
                       std::size_t inner, const double* w, std::size_t nw,
                       std::size_t dst) {
    for (std::size_t o = 0; o < outer; ++o) {
        double* base = data + o * slots * inner;
        double* d = base + dst * inner;
        for (std::size_t k = 0; k < inner; ++k) {
            double acc = 0.0;
            for (std::size_t v = 0; v < nw; ++v) acc = acc + w[v] * base[v * inner + k];
            d[k] = acc;
        }
    }
}

void axis_subtract(double* data, std::size_t outer, std::size_t slots,
                   std::size_t inner, std::size_t ref) {
    for (std::size_t o = 0; o < outer; ++o) {
        double* base = data + o * slots * inner;
        const double* r = base + ref * inner;
        for (std::size_t v = 0; v < slots; ++v) {
            if (v == ref) continue;
            double* s = base + v * inner;
            for (std::size_t k = 0; k < inner; ++k) s[k] -= r[k];
        }
    }
}

void axis_add(double* data, std::size_t outer, std::size_t slots,
              std::size_t inner, std::size_t ref) {
    for (std::size_t o = 0; o < outer; ++o) {
        double* base = data + o * slots * inner;
        const double* r = base + ref * inner;
        for (std::size_t v = 0; v < slots; ++v) {
            if (v == ref) continue;
            double* s = base + v * inner;
            for (std::size_t k = 0; k < inner; ++k) s[k] += r[k];
        }
    }
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{"scalar",        add_scalar,   add,
                                   min_value,       sum_exp_shifted, vecmat,
                                   axis_weighted_sum, axis_subtract, axis_add};
    return table;
}

}  // namespace wg::simd
