#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Batch evaluation of the channel kernel over many output-power samples.
//
// Every routine has a scalar reference implementation and, where the CPU
// supports it, an AVX2+FMA variant. The active table is chosen once at
// startup; RICIAN_SIMD=scalar in the environment forces the reference path.

namespace rician::simd {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
    Isa isa;
    std::string_view name;

    // out[i] = ln I0(z[i])
    void (*log_i0)(std::span<const double> z, std::span<double> out);

    // out[i] = I1(z[i]) / (z[i] I0(z[i]))
    void (*bessel_ratio)(std::span<const double> z, std::span<double> out);

    // out[i] = exp(x[i])
    void (*exp)(std::span<const double> x, std::span<double> out);

    // out[i] = ln g(R[i], s, K), input power s = r^2
    void (*log_kernel)(std::span<const double> R, double s, double K, std::span<double> out);

    // out[i] = d/ds ln g(R[i], s, K)
    void (*dlog_kernel)(std::span<const double> R, double s, double K, std::span<double> out);

    // out[i] = ln sum_j exp(log_p[j]) g(R[i], s[j], K).
    // scratch must hold R.size() * s.size() doubles; on return row j of
    // scratch holds ln g(R, s[j], K).
    void (*log_mixture)(std::span<const double> R, std::span<const double> s,
                        std::span<const double> log_p, double K, std::span<double> out,
                        std::span<double> scratch);
};

const KernelTable& scalar_kernels();

/// nullptr when the binary or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();

/// Table selected for this process.
const KernelTable& kernels();

/// Overrides the selection (tests and benchmarks). Falls back to scalar when
/// the requested ISA is unavailable; returns the table now in effect.
const KernelTable& select_kernels(Isa isa);

}  // namespace rician::simd
