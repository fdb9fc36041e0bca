#include "rician/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rician/error.hpp"

namespace rician {

AmplitudeDistribution::AmplitudeDistribution(std::vector<MassPoint> points)
    : points_(std::move(points)) {
    if (points_.empty())
        throw DomainError("amplitude distribution needs at least one mass point");
    double sum = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const MassPoint& p = points_[i];
        if (!std::isfinite(p.location) || p.location < 0.0)
            throw DomainError("mass point location must be finite and nonnegative");
        if (!std::isfinite(p.probability) || !(p.probability > 0.0))
            throw DomainError("mass point probability must be positive");
        if (i > 0 && !(p.location > points_[i - 1].location))
            throw DomainError("mass point locations must be strictly increasing");
        sum += p.probability;
    }
    if (std::abs(sum - 1.0) > kSumTolerance)
        throw DomainError("mass point probabilities sum to " + std::to_string(sum) + ", not 1");
}

AmplitudeDistribution AmplitudeDistribution::normalized(std::vector<MassPoint> points,
                                                        double sum_tolerance) {
    std::erase_if(points, [](const MassPoint& p) { return p.probability == 0.0; });
    std::sort(points.begin(), points.end(),
              [](const MassPoint& l, const MassPoint& r) { return l.location < r.location; });
    std::vector<MassPoint> merged;
    for (const MassPoint& p : points) {
        if (!merged.empty() && merged.back().location == p.location)
            merged.back().probability += p.probability;
        else
            merged.push_back(p);
    }
    double sum = 0.0;
    for (const MassPoint& p : merged)
        sum += p.probability;
    if (!(std::abs(sum - 1.0) <= sum_tolerance))
        throw DomainError("mass point probabilities sum to " + std::to_string(sum));
    for (MassPoint& p : merged)
        p.probability /= sum;
    return AmplitudeDistribution(std::move(merged));
}

AmplitudeDistribution AmplitudeDistribution::from_powers(std::span<const double> powers,
                                                         std::span<const double> probabilities) {
    if (powers.size() != probabilities.size())
        throw DomainError("powers and probabilities differ in length");
    std::vector<MassPoint> pts;
    pts.reserve(powers.size());
    for (std::size_t i = 0; i < powers.size(); ++i)
        pts.push_back({std::sqrt(std::max(powers[i], 0.0)), probabilities[i]});
    return normalized(std::move(pts), 1e-9);
}

std::vector<double> AmplitudeDistribution::locations() const {
    std::vector<double> out;
    for (const MassPoint& p : points_)
        out.push_back(p.location);
    return out;
}

std::vector<double> AmplitudeDistribution::powers() const {
    std::vector<double> out;
    for (const MassPoint& p : points_)
        out.push_back(p.location * p.location);
    return out;
}

std::vector<double> AmplitudeDistribution::probabilities() const {
    std::vector<double> out;
    for (const MassPoint& p : points_)
        out.push_back(p.probability);
    return out;
}

double AmplitudeDistribution::second_moment() const {
    double m = 0.0;
    for (const MassPoint& p : points_)
        m += p.probability * p.location * p.location;
    return m;
}

double AmplitudeDistribution::fourth_moment() const {
    double m = 0.0;
    for (const MassPoint& p : points_) {
        const double s = p.location * p.location;
        m += p.probability * s * s;
    }
    return m;
}

}  // namespace rician
