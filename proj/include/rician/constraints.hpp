#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "rician/distribution.hpp"

namespace rician {

/// E r^2 <= alpha and E r^4 <= kappa alpha^2, with 1 < kappa < inf.
struct Moment4 {
    double alpha;
    double kappa;
};

/// r^2 <= alpha almost surely.
struct Peak {
    double alpha;
};

/// E r^2 <= alpha.
struct AveragePower {
    double alpha;
};

enum class ConstraintKind { Moment4, Peak, AveragePower };

/// Input constraint in normalized-SNR units (alpha = gamma^2 P / N0).
class ConstraintSet {
public:
    static constexpr double kFeasibilityTol = 1e-10;

    ConstraintSet(Moment4 c);
    ConstraintSet(Peak c);
    ConstraintSet(AveragePower c);

    ConstraintKind kind() const;
    double alpha() const;
    /// Empty unless kind() is Moment4.
    std::optional<double> kappa() const;
    /// Number of Lagrange multipliers in the optimality condition (2, 1 or 0).
    int multiplier_count() const;

    std::string_view name() const;
    const std::variant<Moment4, Peak, AveragePower>& value() const { return value_; }

    /// Constraint values c_i(F) >= 0 in input-power coordinates:
    /// alpha - E s and kappa alpha^2 - E s^2 for the moment regimes, or
    /// alpha - max s for the peak regime.
    std::vector<double> slack(std::span<const double> powers,
                              std::span<const double> probabilities) const;
    std::vector<double> slack(const AmplitudeDistribution& F) const;

    /// Name of the first constraint violated by more than tol, if any.
    std::optional<std::string> violated(const AmplitudeDistribution& F,
                                        double tol = kFeasibilityTol) const;
    bool feasible(const AmplitudeDistribution& F, double tol = kFeasibilityTol) const {
        return !violated(F, tol);
    }

private:
    void validate() const;

    std::variant<Moment4, Peak, AveragePower> value_;
};

/// Parses "moment4", "peak" or "avg-power" with the given parameters; kappa
/// is required for moment4 and ignored otherwise.
ConstraintSet make_constraint(std::string_view name, double alpha, std::optional<double> kappa);

}  // namespace rician
