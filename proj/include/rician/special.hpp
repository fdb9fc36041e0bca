#pragma once

#include <random>

namespace rician {

using Rng = std::mt19937_64;

/// ln I0(z) for z >= 0, evaluated in exponentially scaled form so that no
/// intermediate overflows for any finite z.
double log_i0(double z);

/// I1(z) / (z I0(z)); tends to 1/2 as z -> 0.
double bessel_ratio_over_z(double z);

/// ln g(R, r) where g(R, r) = 1/(1+r^2) exp(-(R + K r^2)/(1+r^2))
/// I0(2 sqrt(K) r sqrt(R) / (1+r^2)) is the conditional density of the
/// normalized output power R given the normalized input amplitude r.
double log_kernel_g(double R, double r, double K);

/// Same kernel parametrized by input power s = r^2.
double log_kernel_power(double R, double s, double K);

/// d/ds ln g(R, s) at input power s = r^2.
double dlog_kernel_dpower(double R, double s, double K);

/// E[R | r] = 1 + (1 + K) r^2.
double kernel_mean(double r, double K);

/// Draws R ~ g(., r): |u|^2 with u circular complex Gaussian, mean sqrt(K) r,
/// total variance 1 + r^2.
double sample_R(double r, double K, Rng& rng);

namespace detail {

/// Arguments below this use the power series, above it the large-argument
/// asymptotic expansion. Both reach ~1e-16 relative accuracy at the seam.
inline constexpr double kBesselSeriesLimit = 25.0;
inline constexpr int kBesselMaxSeriesTerms = 64;
inline constexpr int kBesselMaxAsymptoticTerms = 40;
inline constexpr double kBesselTermTol = 1e-17;

}  // namespace detail

}  // namespace rician
