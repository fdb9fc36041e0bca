#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rician/channel.hpp"
#include "rician/constraints.hpp"
#include "rician/distribution.hpp"
#include "rician/quadrature.hpp"

namespace rician {

/// Lagrange multipliers of the optimality condition. lambda1 pairs with the
/// second-moment (or average-power) constraint, lambda2 with the fourth
/// moment; unused entries are 0.
struct Multipliers {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};

/// Left-hand side of the optimality condition at amplitude r for any channel
/// model and constraint regime:
///   C - iota(r^2) + lambda1 (r^2 - alpha) + lambda2 (r^4 - kappa alpha^2)
/// where iota is the information density of r against the output law of F
/// (the relevant multiplier terms are dropped for the peak and
/// average-power regimes). Nonnegative for all admissible r iff F achieves
/// capacity C, with equality at the mass points of F.
double kt_lhs(double r, const AmplitudeDistribution& F, const ChannelSpec& channel,
              const ConstraintSet& constraints, const Multipliers& lambda, double C,
              const QuadratureConfig& q = {});

/// Batched form of kt_lhs over many amplitudes (evaluated in parallel).
std::vector<double> kt_lhs(const std::vector<double>& r, const AmplitudeDistribution& F,
                           const ChannelSpec& channel, const ConstraintSet& constraints,
                           const Multipliers& lambda, double C, const QuadratureConfig& q = {});

/// Classical model, second- and fourth-moment constraints.
double kt_lhs_moment4(double r, const AmplitudeDistribution& F, double K, double alpha,
                      double kappa, double lambda1, double lambda2, double C,
                      const QuadratureConfig& q = {});

/// Classical model, peak constraint; only defined on [0, sqrt(alpha)].
/// Throws DomainError for r > sqrt(alpha).
double kt_lhs_peak(double r, const AmplitudeDistribution& F, double K, double alpha, double C,
                   const QuadratureConfig& q = {});

/// Phase-noise model, average-power constraint:
/// -D(f_{R|r} || f_R) + lambda (r^2 - alpha) + C.
double kt_lhs_pn(double r, const AmplitudeDistribution& F, double K, double alpha, double lambda,
                 double C, const QuadratureConfig& q = {});

struct MultiplierEstimate {
    Multipliers lambda;
    double residual_norm = 0.0;
    /// Fewer independent equations than multipliers of tight constraints;
    /// the minimum-norm nonnegative solution is returned.
    bool underdetermined = false;
};

/// Recovers the multipliers from the equality conditions at the mass points
/// of F: the condition value vanishes at every mass point and its derivative
/// in r^2 vanishes at every interior mass point. Multipliers of slack
/// constraints are fixed at 0 and the rest are constrained to be
/// nonnegative (small nonnegative least squares).
MultiplierEstimate estimate_multipliers(const AmplitudeDistribution& F, const ChannelSpec& channel,
                                        const ConstraintSet& constraints, double C,
                                        const QuadratureConfig& q = {});

struct VerifyOptions {
    double kt_tol = 1e-3;
    /// The certificate tolerance is min(kt_tol, max(kt_rel_tol * C, 1e-9)):
    /// at low SNR the capacity itself is far below kt_tol, and an absolute
    /// tolerance alone would certify even the zero-information input.
    double kt_rel_tol = 1e-2;
    /// Scan interval is [0, r_hi] with r_hi = max(3 max(r_max, sqrt(alpha)),
    /// min_r_hi); the peak regime always scans exactly [0, sqrt(alpha)].
    double min_r_hi = 0.0;
    int linear_points = 1000;
    int log_points = 1000;
    /// Relative (to alpha) tolerance of the feasibility check.
    double feasibility_rel_tol = 1e-6;
    /// Keep the scanned (r, LHS) samples in the report.
    bool keep_curve = false;
};

struct KTReport {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double capacity_nats = 0.0;
    double grid_min = 0.0;
    double argmin_r = 0.0;
    std::vector<double> mass_point_residuals;
    bool feasible = false;
    bool underdetermined = false;
    double multiplier_residual = 0.0;
    bool pass = false;
    double tolerance = 0.0;  // effective certificate tolerance
    std::string grid_spec;
    std::string failure;  // empty unless the evaluation itself failed
    std::vector<double> curve_r;
    std::vector<double> curve_lhs;
};

/// Certifies F: recovers multipliers, evaluates the condition at the mass
/// points and on a scan grid refined around the minimum, and checks
/// feasibility. pass = feasible, multipliers >= 0, grid_min >= -tol and all
/// |residuals| <= tol, with tol the effective tolerance described in
/// VerifyOptions. On quadrature failure the report carries the
/// data gathered so far, pass = false and the message in `failure`.
KTReport verify(const AmplitudeDistribution& F, const ChannelSpec& channel,
                const ConstraintSet& constraints, double C, const QuadratureConfig& q = {},
                const VerifyOptions& options = {});

/// The scan grid verify() uses (before refinement).
std::vector<double> kt_scan_grid(const AmplitudeDistribution& F, const ConstraintSet& constraints,
                                 const VerifyOptions& options);

}  // namespace rician
