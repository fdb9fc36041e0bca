#include "kernels_internal.hpp"

namespace rician::simd {

const KernelTable* avx2_kernels_unchecked() { return nullptr; }

}  // namespace rician::simd
