#include <cstdlib>
#include <string_view>

#include "kernels_internal.hpp"
#include "rician/simd/kernels.hpp"

namespace rician::simd {

namespace {

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) || defined(__i386__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* initial_selection() {
    if (const char* env = std::getenv("RICIAN_SIMD"); env && std::string_view(env) == "scalar")
        return &scalar_kernels();
    if (const KernelTable* t = avx2_kernels())
        return t;
    return &scalar_kernels();
}

const KernelTable*& current() {
    static const KernelTable* table = initial_selection();
    return table;
}

}  // namespace

const KernelTable* avx2_kernels() {
    static const bool usable = cpu_has_avx2_fma();
    return usable ? avx2_kernels_unchecked() : nullptr;
}

const KernelTable& kernels() { return *current(); }

const KernelTable& select_kernels(Isa isa) {
    const KernelTable* t = &scalar_kernels();
    if (isa == Isa::Avx2 && avx2_kernels())
        t = avx2_kernels();
    current() = t;
    return *t;
}

}  // namespace rician::simd
