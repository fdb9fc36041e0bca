#include "rician/kt.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/Dense>

#include "rician/density.hpp"
#include "rician/error.hpp"
#include "rician/parallel.hpp"

namespace rician {

namespace {

/// Coefficients of (lambda1, lambda2) in the condition at input power s.
std::pair<double, double> multiplier_terms(double s, const ConstraintSet& cs) {
    const double a = cs.alpha();
    switch (cs.kind()) {
        case ConstraintKind::Moment4: return {s - a, s * s - *cs.kappa() * a * a};
        case ConstraintKind::AveragePower: return {s - a, 0.0};
        case ConstraintKind::Peak: return {0.0, 0.0};
    }
    return {0.0, 0.0};
}

void check_amplitude(double r, const ConstraintSet& cs) {
    if (!std::isfinite(r) || r < 0.0)
        throw DomainError("amplitude r must be finite and nonnegative");
    if (cs.kind() == ConstraintKind::Peak && r * r > cs.alpha() * (1.0 + 1e-12))
        throw DomainError("peak-regime condition is only defined for r <= sqrt(alpha)");
}

// mass points closer than this (in r^2) to the origin sit on the r = 0
// boundary, where the condition need not be stationary
constexpr double kInteriorPower = 1e-12;

double lhs_value(double s, double iota, const ConstraintSet& cs, const Multipliers& lambda,
                 double C) {
    const auto [t1, t2] = multiplier_terms(s, cs);
    return C - iota + lambda.lambda1 * t1 + lambda.lambda2 * t2;
}

}  // namespace

double kt_lhs(double r, const AmplitudeDistribution& F, const ChannelSpec& channel,
              const ConstraintSet& constraints, const Multipliers& lambda, double C,
              const QuadratureConfig& q) {
    return kt_lhs(std::vector<double>{r}, F, channel, constraints, lambda, C, q)[0];
}

std::vector<double> kt_lhs(const std::vector<double>& r, const AmplitudeDistribution& F,
                           const ChannelSpec& channel, const ConstraintSet& constraints,
                           const Multipliers& lambda, double C, const QuadratureConfig& q) {
    channel.validate();
    q.validate();
    if (lambda.lambda1 < 0.0 || lambda.lambda2 < 0.0)
        throw DomainError("multipliers must be nonnegative");
    for (double v : r)
        check_amplitude(v, constraints);
    const OutputMixture mixture(F, channel.rician_k);
    std::vector<double> out(r.size());
    parallel_for(r.size(), [&](std::size_t i) {
        const double s = r[i] * r[i];
        const double iota = information_density(s, mixture, channel.model, q, false).density;
        out[i] = lhs_value(s, iota, constraints, lambda, C);
    });
    return out;
}

double kt_lhs_moment4(double r, const AmplitudeDistribution& F, double K, double alpha,
                      double kappa, double lambda1, double lambda2, double C,
                      const QuadratureConfig& q) {
    return kt_lhs(r, F, {ChannelModel::ClassicalRician, K}, Moment4{alpha, kappa},
                  {lambda1, lambda2}, C, q);
}

double kt_lhs_peak(double r, const AmplitudeDistribution& F, double K, double alpha, double C,
                   const QuadratureConfig& q) {
    return kt_lhs(r, F, {ChannelModel::ClassicalRician, K}, Peak{alpha}, {}, C, q);
}

double kt_lhs_pn(double r, const AmplitudeDistribution& F, double K, double alpha, double lambda,
                 double C, const QuadratureConfig& q) {
    return kt_lhs(r, F, {ChannelModel::PhaseNoiseRician, K}, AveragePower{alpha}, {lambda, 0.0}, C,
                  q);
}

MultiplierEstimate estimate_multipliers(const AmplitudeDistribution& F, const ChannelSpec& channel,
                                        const ConstraintSet& constraints, double C,
                                        const QuadratureConfig& q) {
    channel.validate();
    MultiplierEstimate est;
    const int m = constraints.multiplier_count();
    if (m == 0)
        return est;

    const std::vector<double> s = F.powers();
    const std::vector<double> p = F.probabilities();
    const InformationProfile prof = information_profile(s, p, channel, q);

    // rows: condition value at every mass point, derivative in s at interior ones
    std::vector<std::array<double, 2>> rows;
    std::vector<double> rhs;
    for (std::size_t j = 0; j < s.size(); ++j) {
        const auto [t1, t2] = multiplier_terms(s[j], constraints);
        rows.push_back({t1, t2});
        rhs.push_back(prof.density[j] - C);
    }
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (!(s[j] > kInteriorPower))
            continue;
        rows.push_back({1.0, m == 2 ? 2.0 * s[j] : 0.0});
        rhs.push_back(prof.slope[j]);
    }

    // complementary slackness: multipliers of clearly slack constraints are 0
    const std::vector<double> slack = constraints.slack(s, p);
    const double a = constraints.alpha();
    const double scale[2] = {a, m == 2 ? *constraints.kappa() * a * a : 1.0};
    std::vector<int> tight;
    for (int i = 0; i < m; ++i)
        if (slack[i] <= 1e-6 * scale[i])
            tight.push_back(i);

    const Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
    Eigen::VectorXd b(nr);
    for (Eigen::Index i = 0; i < nr; ++i)
        b(i) = rhs[i];

    if (!tight.empty()) {
        Eigen::MatrixXd A(nr, static_cast<Eigen::Index>(tight.size()));
        for (Eigen::Index i = 0; i < nr; ++i)
            for (std::size_t k = 0; k < tight.size(); ++k)
                A(i, static_cast<Eigen::Index>(k)) = rows[i][tight[k]];
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
        qr.setThreshold(1e-10);
        est.underdetermined = qr.rank() < A.cols();
    }

    // nonnegative least squares over the tight multipliers by subset enumeration
    double best = std::numeric_limits<double>::infinity();
    Multipliers best_lambda;
    const unsigned subsets = 1u << tight.size();
    for (unsigned mask = 0; mask < subsets; ++mask) {
        std::vector<int> cols;
        for (std::size_t k = 0; k < tight.size(); ++k)
            if (mask & (1u << k))
                cols.push_back(tight[k]);
        double x[2] = {0.0, 0.0};
        if (!cols.empty()) {
            Eigen::MatrixXd A(nr, static_cast<Eigen::Index>(cols.size()));
            for (Eigen::Index i = 0; i < nr; ++i)
                for (std::size_t k = 0; k < cols.size(); ++k)
                    A(i, static_cast<Eigen::Index>(k)) = rows[i][cols[k]];
            const Eigen::VectorXd sol = A.completeOrthogonalDecomposition().solve(b);
            bool ok = true;
            for (std::size_t k = 0; k < cols.size(); ++k) {
                if (sol(static_cast<Eigen::Index>(k)) < 0.0)
                    ok = false;
                x[cols[k]] = sol(static_cast<Eigen::Index>(k));
            }
            if (!ok)
                continue;
        }
        double res = 0.0;
        for (Eigen::Index i = 0; i < nr; ++i) {
            const double e = rows[i][0] * x[0] + rows[i][1] * x[1] - b(i);
            res += e * e;
        }
        res = std::sqrt(res);
        if (res < best * (1.0 - 1e-12)) {
            best = res;
            best_lambda = {x[0], x[1]};
        }
    }
    est.lambda = best_lambda;
    est.residual_norm = best;
    return est;
}

std::vector<double> kt_scan_grid(const AmplitudeDistribution& F, const ConstraintSet& constraints,
                                 const VerifyOptions& options) {
    const double root_alpha = std::sqrt(constraints.alpha());
    const double r_hi = constraints.kind() == ConstraintKind::Peak
                            ? root_alpha
                            : std::max(3.0 * std::max(F.max_location(), root_alpha),
                                       options.min_r_hi);
    std::vector<double> grid;
    const int nl = std::max(options.linear_points, 2);
    for (int i = 0; i < nl; ++i)
        grid.push_back(r_hi * i / (nl - 1));
    const int ng = std::max(options.log_points, 0);
    const double lo = r_hi * 1e-4;
    for (int i = 0; i < ng; ++i)
        grid.push_back(lo * std::pow(r_hi / lo, ng > 1 ? static_cast<double>(i) / (ng - 1) : 1.0));
    for (const MassPoint& mp : F.points())
        if (mp.location <= r_hi)
            grid.push_back(mp.location);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (constraints.kind() == ConstraintKind::Peak)
        for (double& r : grid)
            r = std::min(r, root_alpha);
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

KTReport verify(const AmplitudeDistribution& F, const ChannelSpec& channel,
                const ConstraintSet& constraints, double C, const QuadratureConfig& q,
                const VerifyOptions& options) {
    channel.validate();
    q.validate();
    KTReport rep;
    rep.capacity_nats = C;
    rep.tolerance = std::min(options.kt_tol, std::max(options.kt_rel_tol * C, 1e-9));
    const double a = constraints.alpha();
    rep.feasible = constraints.feasible(F, options.feasibility_rel_tol * a);

    const std::vector<double> grid = kt_scan_grid(F, constraints, options);
    char spec[160];
    std::snprintf(spec, sizeof spec,
                  "[0, %.6g]: %d linear + %d log-spaced points + mass points, refined x2 near "
                  "the minimum and the mass points",
                  grid.back(), options.linear_points, options.log_points);
    rep.grid_spec = spec;

    try {
        const MultiplierEstimate est = estimate_multipliers(F, channel, constraints, C, q);
        rep.lambda1 = est.lambda.lambda1;
        rep.lambda2 = est.lambda.lambda2;
        rep.underdetermined = est.underdetermined;
        rep.multiplier_residual = est.residual_norm;

        const std::vector<double> s = F.powers();
        const std::vector<double> p = F.probabilities();
        const InformationProfile prof = information_profile(s, p, channel, q);
        for (std::size_t j = 0; j < s.size(); ++j)
            rep.mass_point_residuals.push_back(
                lhs_value(s[j], prof.density[j], constraints, est.lambda, C));

        std::vector<double> r = grid;
        std::vector<double> v = kt_lhs(r, F, channel, constraints, est.lambda, C, q);

        // halve the spacing around the minimum and around every mass point
        std::vector<std::size_t> centers;
        centers.push_back(static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin()));
        for (const MassPoint& mp : F.points()) {
            const auto it = std::lower_bound(r.begin(), r.end(), mp.location);
            if (it != r.end())
                centers.push_back(static_cast<std::size_t>(it - r.begin()));
        }
        std::vector<double> extra;
        for (std::size_t c : centers) {
            const std::size_t lo = c >= 2 ? c - 2 : 0;
            const std::size_t hi = std::min(r.size() - 1, c + 2);
            for (std::size_t i = lo; i < hi; ++i)
                extra.push_back(0.5 * (r[i] + r[i + 1]));
        }
        std::sort(extra.begin(), extra.end());
        extra.erase(std::unique(extra.begin(), extra.end()), extra.end());
        const std::vector<double> ev = kt_lhs(extra, F, channel, constraints, est.lambda, C, q);
        std::vector<std::pair<double, double>> all;
        for (std::size_t i = 0; i < r.size(); ++i)
            all.emplace_back(r[i], v[i]);
        for (std::size_t i = 0; i < extra.size(); ++i)
            all.emplace_back(extra[i], ev[i]);
        std::sort(all.begin(), all.end());

        rep.grid_min = std::numeric_limits<double>::infinity();
        for (const auto& [ri, vi] : all)
            if (vi < rep.grid_min) {
                rep.grid_min = vi;
                rep.argmin_r = ri;
            }
        if (options.keep_curve)
            for (const auto& [ri, vi] : all) {
                rep.curve_r.push_back(ri);
                rep.curve_lhs.push_back(vi);
            }

        double worst_residual = 0.0;
        for (double e : rep.mass_point_residuals)
            worst_residual = std::max(worst_residual, std::abs(e));
        rep.pass = rep.feasible && rep.lambda1 >= 0.0 && rep.lambda2 >= 0.0 &&
                   rep.grid_min >= -rep.tolerance && worst_residual <= rep.tolerance;
    } catch (const NumericalFailure& e) {
        rep.failure = e.what();
        rep.pass = false;
    }
    return rep;
}

}  // namespace rician
