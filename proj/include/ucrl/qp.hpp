#pragma once

#include <Eigen/Dense>

namespace ucrl {

/// min 0.5 x'diag(h)x + g'x  s.t.  A_eq x = b_eq,  A_in x <= b_in.
/// h >= 0 (semidefinite allowed); intended for a few dozen variables.
struct QpProblem {
  Eigen::VectorXd hess_diag;
  Eigen::VectorXd linear;
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd a_in;
  Eigen::VectorXd b_in;

  int size() const { return static_cast<int>(linear.size()); }
  double objective(const Eigen::VectorXd& x) const;
};

enum class QpStatus { optimal, infeasible, unbounded, iteration_limit };

struct QpResult {
  QpStatus status = QpStatus::iteration_limit;
  Eigen::VectorXd x;
  Eigen::VectorXd eq_multipliers;
  Eigen::VectorXd in_multipliers;  // >= 0 at optimum, zero for inactive rows
  int iterations = 0;
};

/// Primal active-set method from a point satisfying every constraint.
/// Zero-curvature directions in the working-set null space are followed until
/// a constraint blocks, so linear objectives are handled.
QpResult solve_qp_from(const QpProblem& qp, Eigen::VectorXd x0, double tol = 1e-9);

/// Two-phase solve; `x_eq` must satisfy the equality rows (inequalities may be violated).
QpResult solve_qp(const QpProblem& qp, const Eigen::VectorXd& x_eq, double tol = 1e-9);

/// max(|stationarity|, |negative multipliers|, complementarity, primal violation).
double qp_kkt_residual(const QpProblem& qp, const QpResult& result);

}  // namespace ucrl
