#include "rician/constraints.hpp"

#include <algorithm>
#include <cmath>

#include "rician/error.hpp"

namespace rician {

ConstraintSet::ConstraintSet(Moment4 c) : value_(c) { validate(); }
ConstraintSet::ConstraintSet(Peak c) : value_(c) { validate(); }
ConstraintSet::ConstraintSet(AveragePower c) : value_(c) { validate(); }

void ConstraintSet::validate() const {
    const double a = alpha();
    if (!std::isfinite(a) || !(a > 0.0))
        throw DomainError("alpha must be finite and positive");
    if (const auto* m = std::get_if<Moment4>(&value_))
        if (!std::isfinite(m->kappa) || !(m->kappa > 1.0))
            throw DomainError("kappa must be finite and greater than 1");
}

ConstraintKind ConstraintSet::kind() const {
    return static_cast<ConstraintKind>(value_.index());
}

double ConstraintSet::alpha() const {
    return std::visit([](const auto& c) { return c.alpha; }, value_);
}

std::optional<double> ConstraintSet::kappa() const {
    if (const auto* m = std::get_if<Moment4>(&value_))
        return m->kappa;
    return std::nullopt;
}

int ConstraintSet::multiplier_count() const {
    switch (kind()) {
        case ConstraintKind::Moment4: return 2;
        case ConstraintKind::AveragePower: return 1;
        case ConstraintKind::Peak: return 0;
    }
    return 0;
}

std::string_view ConstraintSet::name() const {
    switch (kind()) {
        case ConstraintKind::Moment4: return "moment4";
        case ConstraintKind::Peak: return "peak";
        case ConstraintKind::AveragePower: return "avg-power";
    }
    return "";
}

std::vector<double> ConstraintSet::slack(std::span<const double> powers,
                                         std::span<const double> probabilities) const {
    const double a = alpha();
    if (kind() == ConstraintKind::Peak) {
        double smax = 0.0;
        for (std::size_t j = 0; j < powers.size(); ++j)
            if (probabilities[j] > 0.0)
                smax = std::max(smax, powers[j]);
        return {a - smax};
    }
    double m2 = 0.0, m4 = 0.0;
    for (std::size_t j = 0; j < powers.size(); ++j) {
        m2 += probabilities[j] * powers[j];
        m4 += probabilities[j] * powers[j] * powers[j];
    }
    if (kind() == ConstraintKind::AveragePower)
        return {a - m2};
    return {a - m2, *kappa() * a * a - m4};
}

std::vector<double> ConstraintSet::slack(const AmplitudeDistribution& F) const {
    return slack(F.powers(), F.probabilities());
}

std::optional<std::string> ConstraintSet::violated(const AmplitudeDistribution& F,
                                                   double tol) const {
    const std::vector<double> c = slack(F);
    switch (kind()) {
        case ConstraintKind::Peak:
            if (c[0] < -tol)
                return "peak power";
            break;
        case ConstraintKind::AveragePower:
            if (c[0] < -tol)
                return "second moment";
            break;
        case ConstraintKind::Moment4:
            if (c[0] < -tol)
                return "second moment";
            if (c[1] < -tol)
                return "fourth moment";
            break;
    }
    return std::nullopt;
}

ConstraintSet make_constraint(std::string_view name, double alpha, std::optional<double> kappa) {
    if (name == "moment4") {
        if (!kappa)
            throw DomainError("moment4 constraint requires kappa");
        return Moment4{alpha, *kappa};
    }
    if (name == "peak")
        return Peak{alpha};
    if (name == "avg-power")
        return AveragePower{alpha};
    throw DomainError("unknown constraint '" + std::string(name) +
                      "' (expected moment4, peak or avg-power)");
}

}  // namespace rician
