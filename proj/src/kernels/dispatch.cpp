#include <cstdlib>
#include <string_view>

#include "qles/kernels.hpp"

namespace qles::simd {

#if QLES_HAVE_AVX2
const KernelTable& avx2_table();
#endif

const KernelTable* avx2_kernels() {
#if QLES_HAVE_AVX2
    static const bool supported = [] {
        __builtin_cpu_init();
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    }();
    return supported ? &avx2_table() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& kernels() {
    static const KernelTable& active = []() -> const KernelTable& {
        const char* env = std::getenv("QLES_SIMD");
        const std::string_view request = env ? env : "";
        if (request == "scalar") return scalar_kernels();
        if (const KernelTable* fast = avx2_kernels()) return *fast;
        return scalar_kernels();
    }();
    return active;
}

}  // namespace qles::simd
