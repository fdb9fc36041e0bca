#include "rician/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rician/error.hpp"

namespace rician {

namespace {

Eigen::VectorXd scaling_of(const Eigen::MatrixXd& G) {
    Eigen::VectorXd d(G.rows());
    for (Eigen::Index i = 0; i < G.rows(); ++i) {
        const double v = std::abs(G(i, i));
        d(i) = v > 0.0 && std::isfinite(v) ? 1.0 / std::sqrt(v) : 1.0;
    }
    return d;
}

struct Constraint {
    Eigen::VectorXd normal;
    double rhs;
    bool equality;
    Eigen::Index source;  // row in the original eq or ineq block
};

}  // namespace

Eigen::MatrixXd make_positive_definite(const Eigen::MatrixXd& G, double min_eigen) {
    const Eigen::VectorXd d = scaling_of(G);
    Eigen::MatrixXd S = d.asDiagonal() * (0.5 * (G + G.transpose())) * d.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
    Eigen::VectorXd ev = eig.eigenvalues();
    const double top = std::max(ev.cwiseAbs().maxCoeff(), 1.0);
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        ev(i) = std::max(std::abs(ev(i)), min_eigen * top);
    S = eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
    const Eigen::VectorXd inv = d.cwiseInverse();
    Eigen::MatrixXd out = inv.asDiagonal() * S * inv.asDiagonal();
    return 0.5 * (out + out.transpose());
}

QpSolution solve_qp(const QpProblem& pb) {
    const Eigen::Index n = pb.gradient.size();
    const auto block_ok = [n](const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
        return A.rows() == b.size() && (A.rows() == 0 || A.cols() == n);
    };
    if (pb.hessian.rows() != n || pb.hessian.cols() != n || !block_ok(pb.eq, pb.eq_rhs) ||
        !block_ok(pb.ineq, pb.ineq_rhs))
        throw DomainError("inconsistent QP dimensions");

    // work in y = x / d so that the scaled Hessian has unit diagonal
    const Eigen::VectorXd d = scaling_of(pb.hessian);
    const Eigen::MatrixXd G = d.asDiagonal() * pb.hessian * d.asDiagonal();
    const Eigen::VectorXd g = d.cwiseProduct(pb.gradient);
    const Eigen::LLT<Eigen::MatrixXd> chol(G);
    if (chol.info() != Eigen::Success)
        throw DomainError("QP Hessian is not positive definite");
    const Eigen::MatrixXd Ginv = chol.solve(Eigen::MatrixXd::Identity(n, n));

    std::vector<Constraint> cons;
    for (Eigen::Index i = 0; i < pb.eq.rows(); ++i) {
        Eigen::VectorXd a = d.cwiseProduct(pb.eq.row(i).transpose());
        cons.push_back({a, pb.eq_rhs(i), true, i});
    }
    for (Eigen::Index i = 0; i < pb.ineq.rows(); ++i) {
        Eigen::VectorXd a = d.cwiseProduct(pb.ineq.row(i).transpose());
        cons.push_back({a, pb.ineq_rhs(i), false, i});
    }
    // normalize rows so violation tolerances are comparable
    for (Constraint& c : cons) {
        const double nrm = c.normal.norm();
        if (nrm > 0.0) {
            c.normal /= nrm;
            c.rhs /= nrm;
        }
    }
    std::vector<double> row_norm;
    for (Eigen::Index i = 0; i < pb.eq.rows(); ++i)
        row_norm.push_back(d.cwiseProduct(pb.eq.row(i).transpose()).norm());
    for (Eigen::Index i = 0; i < pb.ineq.rows(); ++i)
        row_norm.push_back(d.cwiseProduct(pb.ineq.row(i).transpose()).norm());

    Eigen::VectorXd y = -chol.solve(g);
    std::vector<std::size_t> active;
    std::vector<double> u;
    std::vector<char> is_active(cons.size(), 0);
    std::vector<double> sign(cons.size(), 1.0);

    QpSolution out;
    const double tol = 1e-12;
    const int max_iter = static_cast<int>(20 * (cons.size() + n) + 50);
    std::size_t next_eq = 0;

    const auto violation = [&](std::size_t i) {
        return sign[i] * (cons[i].normal.dot(y) - cons[i].rhs);
    };

    bool failed = false;
    for (int iter = 0; iter < max_iter; ++iter) {
        out.iterations = iter + 1;
        std::size_t p = cons.size();
        if (next_eq < static_cast<std::size_t>(pb.eq.rows())) {
            p = next_eq++;
            if (cons[p].normal.squaredNorm() == 0.0) {
                if (std::abs(cons[p].rhs) > tol) {
                    failed = true;
                    break;
                }
                continue;
            }
            sign[p] = cons[p].normal.dot(y) - cons[p].rhs > 0.0 ? -1.0 : 1.0;
        } else {
            double worst = -tol * (1.0 + y.lpNorm<Eigen::Infinity>());
            for (std::size_t i = 0; i < cons.size(); ++i) {
                if (cons[i].equality || is_active[i])
                    continue;
                const double v = violation(i);
                if (v < worst) {
                    worst = v;
                    p = i;
                }
            }
            if (p == cons.size())
                break;
            if (cons[p].normal.squaredNorm() == 0.0) {
                failed = true;
                break;
            }
        }

        const Eigen::VectorXd np = sign[p] * cons[p].normal;
        double up = 0.0;
        bool added = false;
        for (int inner = 0; inner < max_iter && !added; ++inner) {
            const std::size_t q = active.size();
            Eigen::VectorXd z, r;
            if (q == 0) {
                z = Ginv * np;
            } else {
                Eigen::MatrixXd N(n, q);
                for (std::size_t j = 0; j < q; ++j)
                    N.col(j) = sign[active[j]] * cons[active[j]].normal;
                const Eigen::MatrixXd GN = Ginv * N;
                const Eigen::MatrixXd M = N.transpose() * GN;
                const Eigen::MatrixXd Nstar = M.completeOrthogonalDecomposition().solve(GN.transpose());
                r = Nstar * np;
                z = Ginv * np - GN * r;
            }
            double t1 = std::numeric_limits<double>::infinity();
            std::size_t drop = q;
            for (std::size_t j = 0; j < q; ++j) {
                if (cons[active[j]].equality)
                    continue;
                if (r(j) > 1e-14 && u[j] / r(j) < t1) {
                    t1 = u[j] / r(j);
                    drop = j;
                }
            }
            const double curv = z.dot(np);
            const bool degenerate = z.norm() <= 1e-12 || curv <= 1e-14;
            const double s = sign[p] * (cons[p].normal.dot(y) - cons[p].rhs);
            if (degenerate) {
                if (cons[p].equality && std::abs(s) <= 1e-10 * (1.0 + std::abs(cons[p].rhs))) {
                    // dependent but consistent equality: nothing to add
                    added = true;
                    break;
                }
                if (drop == q) {
                    failed = true;
                    break;
                }
                for (std::size_t j = 0; j < q; ++j)
                    u[j] -= t1 * r(j);
                up += t1;
                is_active[active[drop]] = 0;
                active.erase(active.begin() + static_cast<std::ptrdiff_t>(drop));
                u.erase(u.begin() + static_cast<std::ptrdiff_t>(drop));
                continue;
            }
            const double t2 = std::max(0.0, -s / curv);
            const double t = std::min(t1, t2);
            y += t * z;
            for (std::size_t j = 0; j < q; ++j)
                u[j] -= t * r(j);
            up += t;
            if (t2 <= t1) {
                active.push_back(p);
                u.push_back(up);
                is_active[p] = 1;
                added = true;
            } else {
                is_active[active[drop]] = 0;
                active.erase(active.begin() + static_cast<std::ptrdiff_t>(drop));
                u.erase(u.begin() + static_cast<std::ptrdiff_t>(drop));
            }
        }
        if (failed)
            break;
    }

    out.feasible = !failed;
    if (out.feasible) {
        for (std::size_t i = 0; i < cons.size(); ++i) {
            const double v = cons[i].normal.dot(y) - cons[i].rhs;
            const double lim = 1e-9 * (1.0 + y.lpNorm<Eigen::Infinity>());
            if ((cons[i].equality && std::abs(v) > lim) || (!cons[i].equality && v < -lim))
                out.feasible = false;
        }
    }
    out.x = d.cwiseProduct(y);
    out.eq_multipliers = Eigen::VectorXd::Zero(pb.eq.rows());
    out.ineq_multipliers = Eigen::VectorXd::Zero(pb.ineq.rows());
    for (std::size_t j = 0; j < active.size(); ++j) {
        const Constraint& c = cons[active[j]];
        // undo the row normalization: multiplier of the original row
        const double nrm = row_norm[active[j]];
        const double val = sign[active[j]] * u[j] / (nrm > 0.0 ? nrm : 1.0);
        if (c.equality)
            out.eq_multipliers(c.source) = val;
        else
            out.ineq_multipliers(c.source) = val;
    }
    return out;
}

}  // namespace rician
