#pragma once

#include "rician/simd/kernels.hpp"

namespace rician::simd {

// Defined in kernels_avx2.cpp when the compiler can target AVX2; the
// dispatcher still checks the running CPU before using it.
const KernelTable* avx2_kernels_unchecked();

}  // namespace rician::simd
