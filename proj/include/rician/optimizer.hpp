#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rician/channel.hpp"
#include "rician/constraints.hpp"
#include "rician/distribution.hpp"
#include "rician/kt.hpp"
#include "rician/quadrature.hpp"

namespace rician {

struct SolverConfig {
    int max_points = 8;
    int restarts = 16;
    double prob_opt_tol = 1e-10;
    double loc_opt_tol = 1e-8;
    int max_outer_iters = 500;
    std::uint64_t seed = 1;
    /// Certificate settings used by solve_capacity.
    VerifyOptions verify;

    void validate() const;
};

struct Solution {
    AmplitudeDistribution distribution;
    double capacity_nats = 0.0;
    KTReport report;
    int n_points_tried = 0;
    bool converged = false;
};

struct ProbabilityResult {
    /// One entry per input location; entries may be 0.
    std::vector<double> probabilities;
    /// Duals of the moment constraints (zero in the peak regime).
    Multipliers duals;
    /// Dual of the sum-to-one constraint.
    double simplex_dual = 0.0;
    double mutual_information = 0.0;
    /// Largest violation of the optimality conditions of the concave
    /// probability subproblem.
    double kkt_residual = 0.0;
};

/// Maximizes MI over the probabilities of a fixed set of distinct locations
/// (Newton steps on the concave subproblem, each a small QP). `initial`, when
/// given and feasible, is the starting point. Throws InfeasibleError naming
/// the violated constraint when no probability vector on these locations is
/// feasible.
ProbabilityResult optimize_probabilities(std::span<const double> locations,
                                         const ChannelSpec& channel,
                                         const ConstraintSet& constraints,
                                         const QuadratureConfig& q = {},
                                         const SolverConfig& config = {},
                                         std::span<const double> initial = {});

/// Jointly improves locations and probabilities of a feasible F by a
/// sequential quadratic programming ascent on MI (exact probability
/// curvature, finite-difference location curvature, l1 merit line search).
/// Colliding mass points are merged and vanishing ones dropped; the peak
/// regime keeps locations in [0, sqrt(alpha)]. The result is feasible and
/// its MI is never below that of F by more than 1e-12.
AmplitudeDistribution refine_locations(const AmplitudeDistribution& F, const ChannelSpec& channel,
                                       const ConstraintSet& constraints,
                                       const QuadratureConfig& q = {},
                                       const SolverConfig& config = {});

struct FixedNResult {
    AmplitudeDistribution distribution;
    double mutual_information = 0.0;
};

/// Best of config.restarts multi-start runs with at most n mass points.
/// Starting points: the two-point ansatz (moment regime), each warm start
/// adapted to n points, equispaced locations, then seeded random locations.
/// Deterministic for a fixed seed.
FixedNResult solve_fixed_n(int n, const ChannelSpec& channel, const ConstraintSet& constraints,
                           const SolverConfig& config = {}, const QuadratureConfig& q = {},
                           std::span<const AmplitudeDistribution> warm_starts = {});

/// Escalates the number of mass points from 1 (peak or phase-noise model) or
/// 2 (classical moment regimes) until verify() certifies the solution or
/// config.max_points is reached; then returns the best candidate with
/// converged = false.
Solution solve_capacity(const ChannelSpec& channel, const ConstraintSet& constraints,
                        const SolverConfig& config = {}, const QuadratureConfig& q = {},
                        const std::optional<AmplitudeDistribution>& warm_start = std::nullopt);

/// {(0, 1 - 1/kappa), (sqrt(kappa alpha), 1/kappa)}: both moment
/// constraints tight.
AmplitudeDistribution ansatz_two_point(double kappa, double alpha);

}  // namespace rician
