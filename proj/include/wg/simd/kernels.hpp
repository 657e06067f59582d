#pragma once

#include <cstddef>
#include <string>
#include <vector>

// Data-parallel inner loops. Every kernel has a scalar reference version;
// vector variants must agree bit-for-bit except sum_exp_shifted, whose
// exponential is a polynomial approximation (within a few ulp).
namespace wg::simd {

struct KernelTable {
    const char* name;

    // dst[i] = src[i] + c
    void (*add_scalar)(double* dst, const double* src, double c, std::size_t n);
    // dst[i] = a[i] + b[i]
    void (*add)(double* dst, const double* a, const double* b, std::size_t n);
    double (*min_value)(const double* x, std::size_t n);
    // sum_i exp(shift - x[i]); callers pass shift <= min(x)
    double (*sum_exp_shifted)(const double* x, std::size_t n, double shift);
    // out[j] = sum_i v[i] * m[i*cols + j], i ascending
    void (*vecmat)(const double* v, const double* m, double* out,
                   std::size_t rows, std::size_t cols);
    // data viewed as [outer][slots][inner]; slot `dst` <- sum_v w[v]*slot v
    // over v < nw (v ascending)
    void (*axis_weighted_sum)(double* data, std::size_t outer, std::size_t slots,
                              std::size_t inner, const double* w, std::size_t nw,
                              std::size_t dst);
    // slot v -= slot ref for every v != ref
    void (*axis_subtract)(double* data, std::size_t outer, std::size_t slots,
                          std::size_t inner, std::size_t ref);
    // slot v += slot ref for every v != ref
    void (*axis_add)(double* data, std::size_t outer, std::size_t slots,
                     std::size_t inner, std::size_t ref);
};

const KernelTable& scalar_kernels();

// nullptr when the variant is not compiled in or the CPU lacks support.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

// Active table. Chosen once: WG_SIMD=scalar|avx2|neon overrides detection.
const KernelTable& kernels();

std::vector<std::string> available_kernel_sets();

// Subset Moebius transform in place: f[S] <- sum_{T subset S} (-1)^{|S\T|} f[T].
void subset_mobius(double* f, unsigned nbits, const KernelTable& k = kernels());
// Inverse (zeta) transform: f[S] <- sum_{T subset S} f[T].
void subset_zeta(double* f, unsigned nbits, const KernelTable& k = kernels());

}  // namespace wg::simd
