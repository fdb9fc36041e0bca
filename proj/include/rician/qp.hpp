#pragma once

#include <Eigen/Dense>

namespace rician {

/// Dense convex quadratic program
///   minimize   1/2 x' G x + g' x
///   subject to A_eq x = b_eq,  A_in x >= b_in
/// with G symmetric positive definite.
struct QpProblem {
    Eigen::MatrixXd hessian;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd eq;
    Eigen::VectorXd eq_rhs;
    Eigen::MatrixXd ineq;
    Eigen::VectorXd ineq_rhs;
};

struct QpSolution {
    Eigen::VectorXd x;
    /// Multipliers with G x + g = A_eq' y + A_in' z, z >= 0.
    Eigen::VectorXd eq_multipliers;
    Eigen::VectorXd ineq_multipliers;
    bool feasible = false;
    int iterations = 0;
};

/// Goldfarb-Idnani dual active-set method. The problem is rescaled by the
/// Hessian diagonal internally, so variables of very different magnitude are
/// handled. Returns feasible = false when the constraints are inconsistent.
QpSolution solve_qp(const QpProblem& problem);

/// Replaces G by the nearest matrix (after symmetric diagonal scaling) whose
/// eigenvalues are at least min_eigen times the largest one.
Eigen::MatrixXd make_positive_definite(const Eigen::MatrixXd& G, double min_eigen = 1e-8);

}  // namespace rician
