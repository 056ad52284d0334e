#pragma once

#include <Eigen/Core>

namespace ralm::linalg {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct SimplexOptions {
  /// Phase-one optimum above this value declares the system infeasible.
  double feas_tol = 1e-9;
  double pivot_tol = 1e-12;
  int max_iterations = 20000;
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  /// Sum of artificial variables at the end of phase one.
  double infeasibility = 0.0;
  int iterations = 0;
};

/**
 * Dense two-phase simplex for the standard form
 *
 *   minimize c'x  subject to  A x = b,  x >= 0.
 *
 * Entering and leaving variables follow Bland's rule. Throws SimplexError when
 * the iteration guard is exceeded.
 */
LpSolution simplex_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                         const Eigen::VectorXd& c, const SimplexOptions& options = {});

/// Phase one only: is {x >= 0 : A x = b} nonempty?
LpSolution simplex_feasible(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                            const SimplexOptions& options = {});

}  // namespace ralm::linalg
