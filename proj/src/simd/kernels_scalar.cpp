#include <algorithm>
#include <cmath>
#include <limits>

#include "../special_detail.hpp"
#include "kernels_internal.hpp"
#include "rician/simd/kernels.hpp"

namespace rician::simd {

namespace {

void log_i0_scalar(std::span<const double> z, std::span<double> out) {
    for (std::size_t i = 0; i < z.size(); ++i)
        out[i] = detail::log_i0_unchecked(z[i]);
}

void bessel_ratio_scalar(std::span<const double> z, std::span<double> out) {
    for (std::size_t i = 0; i < z.size(); ++i)
        out[i] = detail::bessel_ratio_unchecked(z[i]);
}

void exp_scalar(std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = std::exp(x[i]);
}

void log_kernel_scalar(std::span<const double> R, double s, double K, std::span<double> out) {
    for (std::size_t i = 0; i < R.size(); ++i)
        out[i] = detail::log_kernel_power_unchecked(R[i], s, K);
}

void dlog_kernel_scalar(std::span<const double> R, double s, double K, std::span<double> out) {
    for (std::size_t i = 0; i < R.size(); ++i)
        out[i] = detail::dlog_kernel_dpower_unchecked(R[i], s, K);
}

void log_mixture_scalar(std::span<const double> R, std::span<const double> s,
                        std::span<const double> log_p, double K, std::span<double> out,
                        std::span<double> scratch) {
    const std::size_t n = R.size();
    const std::size_t m = s.size();
    for (std::size_t j = 0; j < m; ++j)
        log_kernel_scalar(R, s[j], K, scratch.subspan(j * n, n));
    for (std::size_t i = 0; i < n; ++i) {
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m; ++j)
            hi = std::max(hi, log_p[j] + scratch[j * n + i]);
        double sum = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            sum += std::exp(log_p[j] + scratch[j * n + i] - hi);
        out[i] = hi + std::log(sum);
    }
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{
        Isa::Scalar,        "scalar",          &log_i0_scalar,     &bessel_ratio_scalar,
        &exp_scalar,        &log_kernel_scalar, &dlog_kernel_scalar, &log_mixture_scalar,
    };
    return table;
}

}  // namespace rician::simd
