#include "rician/special.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "rician/error.hpp"
#include "special_detail.hpp"

namespace rician {

namespace detail {

double log_i0_unchecked(double z) {
    if (z < kBesselSeriesLimit) {
        // I0(z) = sum_k (z^2/4)^k / (k!)^2; accumulate the k >= 1 tail so
        // that log1p keeps full relative accuracy near z = 0.
        const double q = 0.25 * z * z;
        double term = 1.0;
        double tail = 0.0;
        for (int k = 1; k <= kBesselMaxSeriesTerms; ++k) {
            term *= q / (double(k) * k);
            tail += term;
            if (term <= kBesselTermTol * (1.0 + tail))
                break;
        }
        return std::log1p(tail);
    }
    // e^{-z} sqrt(2 pi z) I0(z) = sum_k ((2k-1)!!)^2 / (k! (8z)^k)
    const double t = 1.0 / (8.0 * z);
    double term = 1.0;
    double tail = 0.0;
    for (int k = 1; k <= kBesselMaxAsymptoticTerms; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= odd * odd * t / k;
        tail += term;
        if (term <= kBesselTermTol * (1.0 + tail))
            break;
    }
    return z - 0.5 * (std::log(2.0 * std::numbers::pi) + std::log(z)) + std::log1p(tail);
}

double bessel_ratio_unchecked(double z) {
    if (z < kBesselSeriesLimit) {
        const double q = 0.25 * z * z;
        double a = 1.0, b = 1.0;          // k = 0 terms of I0 and 2 I1 / z
        double sum_a = 1.0, sum_b = 1.0;
        for (int k = 1; k <= kBesselMaxSeriesTerms; ++k) {
            a *= q / (double(k) * k);
            b *= q / (double(k) * (k + 1));
            sum_a += a;
            sum_b += b;
            if (a <= kBesselTermTol * sum_a && b <= kBesselTermTol * sum_b)
                break;
        }
        return 0.5 * sum_b / sum_a;
    }
    const double t = 1.0 / (8.0 * z);
    double t0 = 1.0, t1 = 1.0;
    double s0 = 1.0, s1 = 1.0;
    for (int k = 1; k <= kBesselMaxAsymptoticTerms; ++k) {
        const double odd = 2.0 * k - 1.0;
        t0 *= odd * odd * t / k;
        t1 *= (odd * odd - 4.0) * t / k;
        s0 += t0;
        s1 += t1;
        if (t0 <= kBesselTermTol * s0 && std::abs(t1) <= kBesselTermTol * std::abs(s1))
            break;
    }
    return s1 / (s0 * z);
}

double log_kernel_power_unchecked(double R, double s, double K) {
    const double a = 1.0 + s;
    const double base = -std::log1p(s) - (R + K * s) / a;
    if (K == 0.0 || s == 0.0 || R == 0.0)
        return base;
    return base + log_i0_unchecked(2.0 * std::sqrt(K * R * s) / a);
}

double dlog_kernel_dpower_unchecked(double R, double s, double K) {
    const double a = 1.0 + s;
    const double inv = 1.0 / a;
    double d = -inv + (R - K) * inv * inv;
    if (K == 0.0 || R == 0.0)
        return d;
    const double z = 2.0 * std::sqrt(K * R * s) * inv;
    return d + 2.0 * K * R * (1.0 - s) * inv * inv * inv * bessel_ratio_unchecked(z);
}

}  // namespace detail

namespace {

void require_nonnegative(double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0)
        throw DomainError(std::string(name) + " must be finite and nonnegative, got " +
                          std::to_string(v));
}

}  // namespace

double log_i0(double z) {
    require_nonnegative(z, "log_i0 argument");
    return detail::log_i0_unchecked(z);
}

double bessel_ratio_over_z(double z) {
    require_nonnegative(z, "bessel ratio argument");
    return detail::bessel_ratio_unchecked(z);
}

double log_kernel_g(double R, double r, double K) {
    require_nonnegative(R, "R");
    require_nonnegative(r, "r");
    require_nonnegative(K, "K");
    return detail::log_kernel_power_unchecked(R, r * r, K);
}

double log_kernel_power(double R, double s, double K) {
    require_nonnegative(R, "R");
    require_nonnegative(s, "s");
    require_nonnegative(K, "K");
    return detail::log_kernel_power_unchecked(R, s, K);
}

double dlog_kernel_dpower(double R, double s, double K) {
    require_nonnegative(R, "R");
    require_nonnegative(s, "s");
    require_nonnegative(K, "K");
    return detail::dlog_kernel_dpower_unchecked(R, s, K);
}

double kernel_mean(double r, double K) {
    require_nonnegative(r, "r");
    require_nonnegative(K, "K");
    return 1.0 + (1.0 + K) * r * r;
}

double sample_R(double r, double K, Rng& rng) {
    std::normal_distribution<double> normal;
    const double sigma = std::sqrt(0.5 * (1.0 + r * r));
    const double re = std::sqrt(K) * r + sigma * normal(rng);
    const double im = sigma * normal(rng);
    return re * re + im * im;
}

}  // namespace rician
