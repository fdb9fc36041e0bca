#include "rician/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "rician/density.hpp"
#include "rician/error.hpp"
#include "rician/parallel.hpp"
#include "rician/qp.hpp"
#include "rician/special.hpp"

namespace rician {

namespace {

constexpr double kPruneProbability = 1e-9;
constexpr double kMergeRelative = 1e-6;
constexpr double kCurvatureCap = 1e200;
// powers below this (amplitudes below ~1e-6) are snapped onto the r = 0 boundary
constexpr double kZeroPower = 1e-12;

bool phase_noise(const ChannelSpec& c) { return c.model == ChannelModel::PhaseNoiseRician; }

/// dI/dp_j followed by dI/ds_j.
Eigen::VectorXd mi_gradient(const InformationProfile& prof, std::span<const double> p, bool pn) {
    const Eigen::Index n = static_cast<Eigen::Index>(p.size());
    Eigen::VectorXd g(2 * n);
    for (Eigen::Index j = 0; j < n; ++j) {
        g(j) = prof.density[j] - (pn ? 1.0 : 0.0);
        g(n + j) = p[j] * prof.slope[j];
    }
    return g;
}

Eigen::MatrixXd curvature_matrix(const InformationProfile& prof, std::size_t n) {
    Eigen::MatrixXd H(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
            const double v = prof.curvature[j * n + k];
            H(j, k) = std::isfinite(v) ? std::min(v, kCurvatureCap) : kCurvatureCap;
        }
    return H;
}

/// Rows a_i and values c_i of the moment constraints c_i(p) = b_i - a_i' p
/// (linear in p for fixed powers); empty in the peak regime.
struct MomentRows {
    std::vector<std::vector<double>> coeff;  // a_i over the powers
    std::vector<double> bound;               // b_i
};

MomentRows moment_rows(std::span<const double> s, const ConstraintSet& cs) {
    MomentRows m;
    const double a = cs.alpha();
    if (cs.kind() == ConstraintKind::Peak)
        return m;
    m.coeff.emplace_back(s.begin(), s.end());
    m.bound.push_back(a);
    if (cs.kind() == ConstraintKind::Moment4) {
        std::vector<double> sq;
        for (double v : s)
            sq.push_back(v * v);
        m.coeff.push_back(std::move(sq));
        m.bound.push_back(*cs.kappa() * a * a);
    }
    return m;
}

double penalty(std::span<const double> s, std::span<const double> p, const ConstraintSet& cs) {
    if (cs.kind() == ConstraintKind::Peak)
        return 0.0;
    double v = 0.0;
    for (double c : cs.slack(s, p))
        v += std::max(0.0, -c);
    return v;
}

struct Candidate {
    std::vector<double> s;
    std::vector<double> p;
};

/// Sorts by power, merges colliding amplitudes and drops vanishing masses.
void tidy(Candidate& c) {
    std::vector<std::size_t> order(c.s.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return c.s[l] < c.s[r]; });
    Candidate out;
    for (std::size_t i : order) {
        if (!(c.p[i] >= kPruneProbability))
            continue;
        if (c.s[i] < kZeroPower)
            c.s[i] = 0.0;
        if (!out.s.empty()) {
            const double rl = std::sqrt(out.s.back());
            const double rr = std::sqrt(c.s[i]);
            if (std::abs(rr - rl) < kMergeRelative * (1.0 + rl)) {
                const double w = out.p.back() + c.p[i];
                out.s.back() = (out.p.back() * out.s.back() + c.p[i] * c.s[i]) / w;
                out.p.back() = w;
                continue;
            }
        }
        out.s.push_back(c.s[i]);
        out.p.push_back(c.p[i]);
    }
    if (out.s.empty()) {
        // everything vanished: keep the heaviest point
        const std::size_t k = static_cast<std::size_t>(std::max_element(c.p.begin(), c.p.end()) - c.p.begin());
        out.s.push_back(c.s[k]);
        out.p.push_back(1.0);
    }
    c = std::move(out);
}

std::vector<double> sqrt_all(std::span<const double> s) {
    std::vector<double> r;
    for (double v : s)
        r.push_back(std::sqrt(v));
    return r;
}

AmplitudeDistribution to_distribution(const Candidate& c) {
    return AmplitudeDistribution::from_powers(c.s, c.p);
}

}  // namespace

void SolverConfig::validate() const {
    if (max_points < 1)
        throw DomainError("max_points must be at least 1");
    if (restarts < 1)
        throw DomainError("restarts must be at least 1");
    if (!(prob_opt_tol > 0.0) || !(loc_opt_tol > 0.0))
        throw DomainError("solver tolerances must be positive");
    if (max_outer_iters < 1)
        throw DomainError("max_outer_iters must be at least 1");
    if (!(verify.kt_tol > 0.0) || !(verify.kt_rel_tol >= 0.0))
        throw DomainError("kt_tol must be positive");
}

ProbabilityResult optimize_probabilities(std::span<const double> locations,
                                         const ChannelSpec& channel,
                                         const ConstraintSet& constraints,
                                         const QuadratureConfig& q, const SolverConfig& config,
                                         std::span<const double> initial) {
    channel.validate();
    const std::size_t n = locations.size();
    if (n == 0)
        throw DomainError("optimize_probabilities needs at least one location");
    std::vector<double> s(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(locations[j]) || locations[j] < 0.0)
            throw DomainError("locations must be finite and nonnegative");
        s[j] = locations[j] * locations[j];
    }
    {
        std::vector<double> sorted = s;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw DomainError("locations must be distinct");
    }
    const double alpha = constraints.alpha();
    const double smin = *std::min_element(s.begin(), s.end());
    // locations above the peak limit are pinned to zero probability
    std::vector<char> pinned(n, 0);
    if (constraints.kind() == ConstraintKind::Peak) {
        for (std::size_t j = 0; j < n; ++j)
            pinned[j] = s[j] > alpha * (1.0 + 1e-12);
        if (std::all_of(pinned.begin(), pinned.end(), [](char v) { return v != 0; }))
            throw InfeasibleError("every location exceeds the peak-power limit", "peak power");
    } else if (smin > alpha * (1.0 + 1e-12)) {
        throw InfeasibleError("every location exceeds the second-moment limit", "second moment");
    }

    const MomentRows rows = moment_rows(s, constraints);
    const Eigen::Index nn = static_cast<Eigen::Index>(n);
    const Eigen::Index nm = static_cast<Eigen::Index>(rows.coeff.size());
    const Eigen::Index npin = std::count(pinned.begin(), pinned.end(), 1);

    // feasible region for a step d from p: sum d = 1 - sum p, p + d >= 0,
    // pinned p + d <= 0, b - a'(p + d) >= 0
    const auto step_problem = [&](const std::vector<double>& p) {
        QpProblem pb;
        pb.eq = Eigen::MatrixXd::Ones(1, nn);
        pb.eq_rhs = Eigen::VectorXd::Constant(1, 1.0 - std::accumulate(p.begin(), p.end(), 0.0));
        pb.ineq = Eigen::MatrixXd::Zero(nn + npin + nm, nn);
        pb.ineq_rhs = Eigen::VectorXd::Zero(nn + npin + nm);
        Eigen::Index row = 0;
        for (Eigen::Index j = 0; j < nn; ++j, ++row) {
            pb.ineq(row, j) = 1.0;
            pb.ineq_rhs(row) = -p[j];
        }
        for (Eigen::Index j = 0; j < nn; ++j)
            if (pinned[j]) {
                pb.ineq(row, j) = -1.0;
                pb.ineq_rhs(row) = p[j];
                ++row;
            }
        for (Eigen::Index i = 0; i < nm; ++i, ++row) {
            double used = 0.0;
            for (Eigen::Index j = 0; j < nn; ++j) {
                pb.ineq(row, j) = -rows.coeff[i][j];
                used += rows.coeff[i][j] * p[j];
            }
            pb.ineq_rhs(row) = -(rows.bound[i] - used);
        }
        return pb;
    };
    const auto is_feasible = [&](const std::vector<double>& p) {
        if (p.size() != n)
            return false;
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (!(p[j] >= 0.0) || (pinned[j] && p[j] > 0.0))
                return false;
            sum += p[j];
        }
        if (std::abs(sum - 1.0) > 1e-12)
            return false;
        for (Eigen::Index i = 0; i < nm; ++i) {
            double used = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                used += rows.coeff[i][j] * p[j];
            if (used > rows.bound[i] * (1.0 + 1e-12))
                return false;
        }
        return true;
    };

    std::vector<double> p;
    if (initial.size() == n)
        p.assign(initial.begin(), initial.end());
    if (!is_feasible(p)) {
        // most uniform feasible vector
        std::vector<double> zero(n, 0.0);
        QpProblem pb = step_problem(zero);
        pb.hessian = Eigen::MatrixXd::Identity(nn, nn);
        pb.gradient = Eigen::VectorXd::Zero(nn);
        const QpSolution sol = solve_qp(pb);
        if (!sol.feasible)
            throw InfeasibleError("no probability vector on these locations meets the constraints",
                                  constraints.kind() == ConstraintKind::Moment4 ? "fourth moment"
                                                                                : "second moment");
        p.resize(n);
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            sum += (p[j] = std::max(0.0, sol.x(static_cast<Eigen::Index>(j))));
        for (double& v : p)
            v /= sum;
    }

    const bool pn = phase_noise(channel);
    ProbabilityResult res;
    double step_norm = 0.0;
    double mi = information_profile(s, p, channel, q).mutual_information;
    const auto line_search = [&](const Eigen::VectorXd& d, double slope) {
        for (double t = 1.0; t > 1e-12; t *= 0.5) {
            std::vector<double> trial(n);
            for (std::size_t j = 0; j < n; ++j)
                trial[j] = std::max(0.0, p[j] + t * d(static_cast<Eigen::Index>(j)));
            if (!(*std::max_element(trial.begin(), trial.end()) > 0.0))
                continue;
            const double mt = information_profile(s, trial, channel, q).mutual_information;
            if (mt >= mi + 1e-4 * t * slope) {
                p = std::move(trial);
                mi = mt;
                return true;
            }
        }
        return false;
    };
    const auto record_duals = [&](const QpSolution& sol) {
        res.simplex_dual = -sol.eq_multipliers(0);
        if (nm >= 1)
            res.duals.lambda1 = sol.ineq_multipliers(nn + npin);
        if (nm >= 2)
            res.duals.lambda2 = sol.ineq_multipliers(nn + npin + 1);
    };
    for (int it = 0; it < 200; ++it) {
        const InformationProfile prof = information_profile(s, p, channel, q, true);
        mi = prof.mutual_information;
        Eigen::VectorXd g(nn);
        for (Eigen::Index j = 0; j < nn; ++j)
            g(j) = prof.density[j] - (pn ? 1.0 : 0.0);
        QpProblem pb = step_problem(p);
        pb.hessian = make_positive_definite(curvature_matrix(prof, n), 1e-12);
        pb.gradient = -g;
        const QpSolution sol = solve_qp(pb);
        if (!sol.feasible)
            break;
        const Eigen::VectorXd& d = sol.x;
        record_duals(sol);
        step_norm = d.lpNorm<Eigen::Infinity>();
        const double slope = g.dot(d);
        const bool newton_small =
            step_norm <= config.prob_opt_tol || slope <= 1e-16 * std::max(1.0, std::abs(mi));
        if (!newton_small && line_search(d, slope) && step_norm > 1e-6)
            continue;
        // Newton stalls where the curvature is huge (a far location with
        // vanishing weight); a projected gradient step still makes progress.
        pb.hessian = Eigen::MatrixXd::Identity(nn, nn);
        const QpSolution grad = solve_qp(pb);
        if (!grad.feasible)
            break;
        const double gnorm = grad.x.lpNorm<Eigen::Infinity>();
        const double gslope = g.dot(grad.x);
        if (gnorm <= config.prob_opt_tol || gslope <= 1e-16 * std::max(1.0, std::abs(mi))) {
            if (newton_small)
                break;
            continue;
        }
        if (!line_search(grad.x, gslope) && newton_small)
            break;
        step_norm = std::max(step_norm, gnorm);
    }
    double sum = 0.0;
    for (double& v : p)
        sum += (v = std::max(0.0, v));
    for (double& v : p)
        v /= sum;
    res.probabilities = p;
    res.mutual_information = information_profile(s, p, channel, q).mutual_information;
    res.kkt_residual = step_norm;
    return res;
}

AmplitudeDistribution refine_locations(const AmplitudeDistribution& F, const ChannelSpec& channel,
                                       const ConstraintSet& constraints,
                                       const QuadratureConfig& q, const SolverConfig& config) {
    channel.validate();
    config.validate();
    const bool pn = phase_noise(channel);
    const bool peak = constraints.kind() == ConstraintKind::Peak;
    const double alpha = constraints.alpha();
    const int nc = peak ? 0 : constraints.multiplier_count();
    const double mi_in = mutual_information(F, channel, q);

    Candidate x{F.powers(), F.probabilities()};
    if (peak)
        for (double& v : x.s)
            v = std::min(v, alpha);
    Multipliers lambda;
    double nu = 0.0;

    for (int it = 0; it < config.max_outer_iters; ++it) {
        const std::size_t n = x.s.size();
        const Eigen::Index nn = static_cast<Eigen::Index>(n);
        const InformationProfile prof = information_profile(x.s, x.p, channel, q, true);
        const double mi = prof.mutual_information;
        const InformationProfile base = information_profile(x.s, x.p, channel, q, false, &prof.nodes);
        const Eigen::VectorXd g = mi_gradient(base, x.p, pn);

        // Hessian of MI: exact in p, forward differences of the gradient in s
        Eigen::MatrixXd HI = Eigen::MatrixXd::Zero(2 * nn, 2 * nn);
        HI.topLeftCorner(nn, nn) = -curvature_matrix(prof, n);
        Eigen::MatrixXd cols(2 * nn, nn);
        for (std::size_t k = 0; k < n; ++k) {
            std::vector<double> sk = x.s;
            double h = 1e-6 * (1.0 + sk[k]);
            if (peak && sk[k] + h > alpha)
                h = -h;
            sk[k] += h;
            const InformationProfile pk = information_profile(sk, x.p, channel, q, false, &prof.nodes);
            cols.col(static_cast<Eigen::Index>(k)) = (mi_gradient(pk, x.p, pn) - g) / h;
        }
        for (Eigen::Index j = 0; j < nn; ++j)
            for (Eigen::Index k = 0; k < nn; ++k) {
                HI(j, nn + k) = HI(nn + k, j) = cols(j, k);
                HI(nn + j, nn + k) = 0.5 * (cols(nn + j, k) + cols(nn + k, j));
            }
        Eigen::MatrixXd B = -HI;
        for (Eigen::Index j = 0; j < nn; ++j) {
            const double cross = lambda.lambda1 + 2.0 * lambda.lambda2 * x.s[j];
            B(j, nn + j) += cross;
            B(nn + j, j) += cross;
            B(nn + j, nn + j) += 2.0 * lambda.lambda2 * x.p[j];
        }
        B = make_positive_definite(B, 1e-8);

        // QP for the step d = (dp, ds)
        const std::vector<double> slack = constraints.slack(x.s, x.p);
        QpProblem pb;
        pb.hessian = B;
        pb.gradient = -g;
        pb.eq = Eigen::MatrixXd::Zero(1, 2 * nn);
        pb.eq.leftCols(nn).setOnes();
        pb.eq_rhs = Eigen::VectorXd::Constant(1, 1.0 - std::accumulate(x.p.begin(), x.p.end(), 0.0));
        const Eigen::Index nrows = 3 * nn + nc;
        pb.ineq = Eigen::MatrixXd::Zero(nrows, 2 * nn);
        pb.ineq_rhs = Eigen::VectorXd::Zero(nrows);
        for (Eigen::Index j = 0; j < nn; ++j) {
            const double trust = 0.5 * (1.0 + x.s[j]);
            pb.ineq(j, j) = 1.0;
            pb.ineq_rhs(j) = -x.p[j];
            pb.ineq(nn + j, nn + j) = 1.0;
            pb.ineq_rhs(nn + j) = -std::min(x.s[j], trust);
            pb.ineq(2 * nn + j, nn + j) = -1.0;
            pb.ineq_rhs(2 * nn + j) = -(peak ? std::min(trust, std::max(0.0, alpha - x.s[j])) : trust);
        }
        for (int i = 0; i < nc; ++i) {
            const Eigen::Index row = 3 * nn + i;
            for (Eigen::Index j = 0; j < nn; ++j) {
                pb.ineq(row, j) = i == 0 ? -x.s[j] : -x.s[j] * x.s[j];
                pb.ineq(row, nn + j) = i == 0 ? -x.p[j] : -2.0 * x.p[j] * x.s[j];
            }
            pb.ineq_rhs(row) = -slack[i];
        }
        const QpSolution sol = solve_qp(pb);
        if (!sol.feasible) {
            // restore feasibility through the probabilities alone
            const ProbabilityResult pr =
                optimize_probabilities(sqrt_all(x.s), channel, constraints, q, config, x.p);
            Candidate y{x.s, pr.probabilities};
            tidy(y);
            if (y.s == x.s && y.p == x.p)
                break;
            x = std::move(y);
            continue;
        }
        const Eigen::VectorXd& d = sol.x;
        Multipliers lambda_new;
        if (nc >= 1)
            lambda_new.lambda1 = std::max(0.0, sol.ineq_multipliers(3 * nn));
        if (nc >= 2)
            lambda_new.lambda2 = std::max(0.0, sol.ineq_multipliers(3 * nn + 1));

        double ds_rel = 0.0;
        for (Eigen::Index j = 0; j < nn; ++j)
            ds_rel = std::max(ds_rel, std::abs(d(nn + j)) / (1.0 + x.s[j]));
        const double dp_max = d.head(nn).lpNorm<Eigen::Infinity>();
        lambda = lambda_new;
        if (dp_max <= config.prob_opt_tol && ds_rel <= config.loc_opt_tol)
            break;

        nu = std::max(nu, 2.0 * std::max(lambda_new.lambda1, lambda_new.lambda2) + 1e-8);
        const double viol = penalty(x.s, x.p, constraints);
        const double merit0 = -mi + nu * viol;
        const double dmerit = -g.dot(d) - nu * viol;
        if (dmerit >= -1e-15 * std::max(1.0, std::abs(mi)))
            break;

        bool accepted = false;
        for (double t = 1.0; t > 1e-10; t *= 0.5) {
            Candidate y = x;
            for (std::size_t j = 0; j < n; ++j) {
                y.p[j] = std::max(0.0, x.p[j] + t * d(static_cast<Eigen::Index>(j)));
                y.s[j] = std::max(0.0, x.s[j] + t * d(nn + static_cast<Eigen::Index>(j)));
                if (peak)
                    y.s[j] = std::min(y.s[j], alpha);
            }
            if (!(*std::max_element(y.p.begin(), y.p.end()) > 0.0))
                continue;
            const double mt = information_profile(y.s, y.p, channel, q).mutual_information;
            const double merit = -mt + nu * penalty(y.s, y.p, constraints);
            if (merit <= merit0 + 1e-4 * t * dmerit) {
                tidy(y);
                x = std::move(y);
                accepted = true;
                break;
            }
        }
        if (!accepted)
            break;
    }

    // exact feasibility: final probability solve on the surviving locations
    Candidate out = x;
    for (int pass = 0; pass < 3; ++pass) {
        double sum = std::accumulate(out.p.begin(), out.p.end(), 0.0);
        std::vector<double> init = out.p;
        for (double& v : init)
            v /= sum;
        const ProbabilityResult pr =
            optimize_probabilities(sqrt_all(out.s), channel, constraints, q, config, init);
        Candidate y{out.s, pr.probabilities};
        const std::size_t before = y.s.size();
        tidy(y);
        out = std::move(y);
        if (out.s.size() == before)
            break;
    }
    AmplitudeDistribution result = to_distribution(out);
    if (!constraints.feasible(result) ||
        mutual_information(result, channel, q) < mi_in - 1e-12)
        return F;
    return result;
}

namespace {

/// Adapts a distribution to exactly n points for use as a starting point:
/// extra points are inserted with zero probability, surplus light points are
/// dropped.
std::vector<Candidate> adapt_warm_start(const AmplitudeDistribution& W, std::size_t n,
                                        const ConstraintSet& cs) {
    Candidate base{W.powers(), W.probabilities()};
    std::vector<Candidate> out;
    if (base.s.size() > n) {
        std::vector<std::size_t> order(base.s.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t l, std::size_t r) { return base.p[l] > base.p[r]; });
        Candidate c;
        for (std::size_t k = 0; k < n; ++k) {
            c.s.push_back(base.s[order[k]]);
            c.p.push_back(base.p[order[k]]);
        }
        out.push_back(c);
        return out;
    }
    if (base.s.size() == n) {
        out.push_back(base);
        return out;
    }
    const bool peak = cs.kind() == ConstraintKind::Peak;
    const double cap = peak ? cs.alpha() : std::numeric_limits<double>::infinity();
    const double smax = *std::max_element(base.s.begin(), base.s.end());
    std::vector<double> extra;
    for (std::size_t j = 0; j + 1 < base.s.size(); ++j)
        extra.push_back(0.25 * std::pow(std::sqrt(base.s[j]) + std::sqrt(base.s[j + 1]), 2.0));
    if (!peak) {
        extra.push_back(std::max(smax, cs.alpha()) * 2.0);
        extra.push_back(std::max(smax, cs.alpha()) * 4.0);
    }
    if (base.s.front() > 0.0)
        extra.push_back(0.0);
    if (peak)
        extra.push_back(0.5 * cap);
    for (double e : extra) {
        Candidate c = base;
        const std::size_t add = n - base.s.size();
        for (std::size_t k = 0; k < add; ++k) {
            double v = std::min(cap, e * (1.0 + 0.5 * static_cast<double>(k)));
            if (k > 0 && v == c.s.back())
                v *= 0.5;
            c.s.push_back(v);
            c.p.push_back(0.0);
        }
        out.push_back(c);
    }
    // splitting a mass point in two
    for (std::size_t j = 0; j < base.s.size() && base.s.size() + 1 == n; ++j) {
        if (!(base.s[j] > 0.0))
            continue;
        Candidate c = base;
        c.s[j] = base.s[j] * 0.8;
        c.p[j] = 0.5 * base.p[j];
        c.s.push_back(std::min(cap, base.s[j] * 1.25));
        c.p.push_back(0.5 * base.p[j]);
        out.push_back(c);
    }
    return out;
}

// Adds the location where the optimality condition is most violated, with a
// token probability; the probability step re-solves the weights anyway.
std::optional<AmplitudeDistribution> with_violating_point(const AmplitudeDistribution& F,
                                                          const KTReport& report) {
    if (!report.failure.empty() || !(report.grid_min < 0.0))
        return std::nullopt;
    const double r = report.argmin_r;
    std::vector<MassPoint> pts(F.points().begin(), F.points().end());
    for (const MassPoint& mp : pts)
        if (std::abs(mp.location - r) < 1e-3 * (1.0 + r))
            return std::nullopt;
    pts.push_back({r, 1e-6});
    std::sort(pts.begin(), pts.end(),
              [](const MassPoint& a, const MassPoint& b) { return a.location < b.location; });
    return AmplitudeDistribution::normalized(std::move(pts), 1e-5);
}

std::vector<Candidate> starting_points(std::size_t n, const ConstraintSet& cs,
                                       const SolverConfig& config,
                                       std::span<const AmplitudeDistribution> warm_starts) {
    const double alpha = cs.alpha();
    const bool peak = cs.kind() == ConstraintKind::Peak;
    std::vector<Candidate> out;
    const auto add_powers = [&](std::vector<double> s) {
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        if (s.empty())
            return;
        out.push_back({s, {}});
    };

    if (const auto kappa = cs.kappa()) {
        const double top = *kappa * alpha;
        std::vector<double> s{0.0, top};
        const double scales[] = {0.25, 2.0, 0.5, 4.0, 0.1, 8.0};
        for (std::size_t k = 0; s.size() < n && k < 6; ++k)
            s.push_back(top * scales[k]);
        if (n == 1)
            s = {alpha};
        add_powers(s);
    }
    for (const AmplitudeDistribution& w : warm_starts)
        for (Candidate& c : adapt_warm_start(w, n, cs))
            out.push_back(std::move(c));
    {
        const double r_top = peak ? std::sqrt(alpha) : 3.0 * std::sqrt(alpha);
        std::vector<double> s;
        if (n == 1) {
            s.push_back(alpha);
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                const double r = r_top * static_cast<double>(i) / static_cast<double>(n - 1);
                s.push_back(r * r);
            }
        }
        add_powers(s);
    }

    std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                      static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(n)};
    Rng rng(seq);
    const double ra = std::sqrt(alpha);
    const double r_far = peak ? ra : std::max({3.0 * ra, 2.0 * std::sqrt(cs.kappa().value_or(1.0) * alpha), 5.0});
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int guard = 0;
    while (static_cast<int>(out.size()) < config.restarts && guard++ < 10 * config.restarts) {
        std::vector<double> s;
        if (peak) {
            s.push_back(alpha);
            while (s.size() < n)
                s.push_back(alpha * unit(rng));
        } else {
            s.push_back(0.0);
            const double lo = std::log(0.2 * ra), hi = std::log(r_far);
            while (s.size() < n) {
                const double r = std::exp(lo + (hi - lo) * unit(rng));
                s.push_back(r * r);
            }
        }
        add_powers(s);
    }
    if (static_cast<int>(out.size()) > config.restarts) {
        // the ansatz and warm starts come first and are always kept
        out.resize(static_cast<std::size_t>(std::max<int>(config.restarts, 1)));
    }
    return out;
}

}  // namespace

FixedNResult solve_fixed_n(int n, const ChannelSpec& channel, const ConstraintSet& constraints,
                           const SolverConfig& config, const QuadratureConfig& q,
                           std::span<const AmplitudeDistribution> warm_starts) {
    if (n < 1)
        throw DomainError("n must be at least 1");
    channel.validate();
    config.validate();
    q.validate();
    std::vector<Candidate> starts =
        starting_points(static_cast<std::size_t>(n), constraints, config, warm_starts);
    // a warm-start list longer than the restart budget still gets every entry
    for (const AmplitudeDistribution& w : warm_starts)
        for (Candidate& c : adapt_warm_start(w, static_cast<std::size_t>(n), constraints))
            if (std::find_if(starts.begin(), starts.end(), [&](const Candidate& e) {
                    return e.s == c.s && e.p == c.p;
                }) == starts.end())
                starts.push_back(std::move(c));

    std::vector<std::optional<FixedNResult>> results(starts.size());
    parallel_for(starts.size(), [&](std::size_t i) {
        try {
            const Candidate& c = starts[i];
            std::vector<double> r = sqrt_all(c.s);
            // duplicate amplitudes can arise from clamping; drop them
            std::vector<double> init = c.p;
            for (std::size_t j = 1; j < r.size(); ++j)
                if (r[j] == r[j - 1])
                    return;
            const ProbabilityResult pr =
                optimize_probabilities(r, channel, constraints, q, config, init);
            Candidate y{c.s, pr.probabilities};
            tidy(y);
            const AmplitudeDistribution F0 = to_distribution(y);
            if (!constraints.feasible(F0))
                return;
            const AmplitudeDistribution F1 = refine_locations(F0, channel, constraints, q, config);
            results[i] = FixedNResult{F1, mutual_information(F1, channel, q)};
        } catch (const InfeasibleError&) {
        } catch (const NumericalFailure&) {
        }
    });

    std::optional<FixedNResult> best;
    for (auto& r : results)
        if (r && (!best || r->mutual_information > best->mutual_information))
            best = std::move(r);
    if (!best)
        throw InfeasibleError("no starting point yields a feasible distribution",
                              std::string(constraints.name()));
    return *best;
}

Solution solve_capacity(const ChannelSpec& channel, const ConstraintSet& constraints,
                        const SolverConfig& config, const QuadratureConfig& q,
                        const std::optional<AmplitudeDistribution>& warm_start) {
    channel.validate();
    config.validate();
    q.validate();
    const bool start_at_one =
        constraints.kind() == ConstraintKind::Peak || phase_noise(channel);
    const int n0 = std::min(config.max_points, start_at_one ? 1 : 2);

    std::optional<Solution> best;
    std::optional<AmplitudeDistribution> previous;
    std::optional<AmplitudeDistribution> column;  // previous plus the most violated location
    for (int n = n0; n <= config.max_points; ++n) {
        std::vector<AmplitudeDistribution> warm;
        if (column)
            warm.push_back(*column);
        if (previous)
            warm.push_back(*previous);
        if (warm_start)
            warm.push_back(*warm_start);
        FixedNResult fixed = solve_fixed_n(n, channel, constraints, config, q, warm);
        if (previous) {
            const double prev_mi = mutual_information(*previous, channel, q);
            if (fixed.mutual_information < prev_mi)
                fixed = FixedNResult{*previous, prev_mi};
        }
        KTReport report = verify(fixed.distribution, channel, constraints,
                                 fixed.mutual_information, q, config.verify);
        Solution sol{fixed.distribution, fixed.mutual_information, report, n, report.pass};
        const bool better = !best || sol.capacity_nats > best->capacity_nats;
        if (sol.converged)
            return sol;
        if (better)
            best = sol;
        best->n_points_tried = n;
        previous = fixed.distribution;
        column = with_violating_point(fixed.distribution, report);
    }
    return *best;
}

AmplitudeDistribution ansatz_two_point(double kappa, double alpha) {
    if (!std::isfinite(kappa) || !(kappa > 1.0))
        throw DomainError("kappa must be finite and greater than 1");
    if (!std::isfinite(alpha) || !(alpha > 0.0))
        throw DomainError("alpha must be finite and positive");
    return AmplitudeDistribution({{0.0, 1.0 - 1.0 / kappa}, {std::sqrt(kappa * alpha), 1.0 / kappa}});
}

}  // namespace rician
