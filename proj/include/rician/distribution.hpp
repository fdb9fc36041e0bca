#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rician {

struct MassPoint {
    double location;     // normalized amplitude r
    double probability;
};

/// Discrete input-amplitude law: finitely many mass points with strictly
/// increasing nonnegative locations and positive probabilities summing to 1.
class AmplitudeDistribution {
public:
    static constexpr double kSumTolerance = 1e-12;

    /// Validates; throws DomainError on any violated invariant.
    explicit AmplitudeDistribution(std::vector<MassPoint> points);

    /// Sorts, merges coincident locations, drops zero-probability entries and
    /// rescales probabilities whose sum is within sum_tolerance of one.
    static AmplitudeDistribution normalized(std::vector<MassPoint> points,
                                            double sum_tolerance = 1e-6);

    /// Builds from input powers s_i = r_i^2.
    static AmplitudeDistribution from_powers(std::span<const double> powers,
                                             std::span<const double> probabilities);

    std::span<const MassPoint> points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    const MassPoint& operator[](std::size_t i) const { return points_[i]; }

    std::vector<double> locations() const;
    std::vector<double> powers() const;
    std::vector<double> probabilities() const;

    double second_moment() const;
    double fourth_moment() const;
    double max_location() const { return points_.back().location; }

private:
    std::vector<MassPoint> points_;
};

}  // namespace rician
