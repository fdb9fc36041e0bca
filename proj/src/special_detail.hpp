#pragma once

// Unchecked scalar kernels shared by the public wrappers and the scalar
// batch backend.

namespace rician::detail {

double log_i0_unchecked(double z);
double bessel_ratio_unchecked(double z);
double log_kernel_power_unchecked(double R, double s, double K);
double dlog_kernel_dpower_unchecked(double R, double s, double K);

}  // namespace rician::detail
