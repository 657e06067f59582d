#include "wg/simd/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace wg::simd {

#if defined(WG_HAVE_AVX2)
const KernelTable& avx2_kernel_table();
#endif
#if defined(WG_HAVE_NEON)
const KernelTable& neon_kernel_table();
#endif

const KernelTable* avx2_kernels() {
#if defined(WG_HAVE_AVX2)
    static const bool ok = __builtin_cpu_supports("avx2");
    return ok ? &avx2_kernel_table() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable* neon_kernels() {
#if defined(WG_HAVE_NEON)
    return &neon_kernel_table();
#else
    return nullptr;
#endif
}

namespace {

const KernelTable& select() {
    const char* env = std::getenv("WG_SIMD");
    std::string_view want = env ? env : "auto";
    if (want == "scalar") return scalar_kernels();
    if (want == "avx2" || want == "auto")
        if (const KernelTable* k = avx2_kernels()) return *k;
    if (want == "neon" || want == "auto")
        if (const KernelTable* k = neon_kernels()) return *k;
    return scalar_kernels();
}

}  // namespace

const KernelTable& kernels() {
    static const KernelTable& active = select();
    return active;
}

std::vector<std::string> available_kernel_sets() {
    std::vector<std::string> out{"scalar"};
    if (avx2_kernels()) out.emplace_back("avx2");
    if (neon_kernels()) out.emplace_back("neon");
    return out;
}

void subset_mobius(double* f, unsigned nbits, const KernelTable& k) {
    const std::size_t total = std::size_t{1} << nbits;
    for (unsigned b = 0; b < nbits; ++b) {
        const std::size_t inner = std::size_t{1} << b;
        k.axis_subtract(f, total / (2 * inner), 2, inner, 0);
    }
}

void subset_zeta(double* f, unsigned nbits, const KernelTable& k) {
    const std::size_t total = std::size_t{1} << nbits;
    for (unsigned b = 0; b < nbits; ++b) {
        const std::size_t inner = std::size_t{1} << b;
        k.axis_add(f, total / (2 * inner), 2, inner, 0);
    }
}

}  // namespace wg::simd
