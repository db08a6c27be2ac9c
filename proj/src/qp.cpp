#include "ucrl/qp.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace ucrl {

namespace {

Eigen::MatrixXd working_rows(const QpProblem& qp, const std::vector<int>& work) {
  const int n = qp.size();
  const int m_eq = static_cast<int>(qp.a_eq.rows());
  Eigen::MatrixXd a(m_eq + static_cast<int>(work.size()), n);
  if (m_eq > 0) a.topRows(m_eq) = qp.a_eq;
  for (std::size_t k = 0; k < work.size(); ++k) a.row(m_eq + static_cast<int>(k)) = qp.a_in.row(work[k]);
  return a;
}

// Orthonormal basis of the null space of `a` (n x (n - rank)).
Eigen::MatrixXd null_space(const Eigen::MatrixXd& a, int n) {
  if (a.rows() == 0) return Eigen::MatrixXd::Identity(n, n);
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a.transpose());
  const int rank = static_cast<int>(qr.rank());
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  return q.rightCols(n - rank);
}

}  // namespace

double QpProblem::objective(const Eigen::VectorXd& x) const {
  return 0.5 * x.dot(hess_diag.cwiseProduct(x)) + linear.dot(x);
}

QpResult solve_qp_from(const QpProblem& qp, Eigen::VectorXd x, double tol) {
  const int n = qp.size();
  const int m_eq = static_cast<int>(qp.a_eq.rows());
  const int m_in = static_cast<int>(qp.a_in.rows());
  const double h_scale = std::max(1.0, qp.hess_diag.size() ? qp.hess_diag.maxCoeff() : 0.0);
  const double curvature_tol = 1e-12 * h_scale;
  const int max_iterations = 50 * (n + m_in) + 100;

  QpResult result;
  std::vector<int> work;
  std::vector<bool> in_work(m_in, false);
  int stalled = 0;  // consecutive zero-length steps; switches to smallest-index rules

  for (int iter = 0; iter < max_iterations; ++iter) {
    result.iterations = iter + 1;
    const Eigen::VectorXd grad = qp.hess_diag.cwiseProduct(x) + qp.linear;
    const Eigen::MatrixXd a_w = working_rows(qp, work);
    const Eigen::MatrixXd z = null_space(a_w, n);

    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    bool ray = false;
    if (z.cols() > 0) {
      const Eigen::VectorXd g_red = z.transpose() * grad;
      const Eigen::MatrixXd h_red = z.transpose() * qp.hess_diag.asDiagonal() * z;
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h_red);
      const Eigen::VectorXd gamma = eig.eigenvectors().transpose() * g_red;
      const double grad_tol = tol * (1.0 + grad.lpNorm<Eigen::Infinity>());
      for (int j = 0; j < gamma.size(); ++j)
        if (eig.eigenvalues()(j) <= curvature_tol && std::abs(gamma(j)) > grad_tol) ray = true;
      Eigen::VectorXd y = Eigen::VectorXd::Zero(gamma.size());
      for (int j = 0; j < gamma.size(); ++j) {
        const double e = eig.eigenvalues()(j);
        if (ray) {
          if (e <= curvature_tol) y -= gamma(j) * eig.eigenvectors().col(j);
        } else if (e > curvature_tol) {
          y -= (gamma(j) / e) * eig.eigenvectors().col(j);
        }
      }
      d = z * y;
    }

    const double x_scale = 1.0 + x.lpNorm<Eigen::Infinity>();
    if (!ray && d.lpNorm<Eigen::Infinity>() <= tol * x_scale) {
      Eigen::VectorXd mult = Eigen::VectorXd::Zero(a_w.rows());
      if (a_w.rows() > 0) mult = a_w.transpose().colPivHouseholderQr().solve(-grad);
      const double mult_tol = tol * (1.0 + grad.lpNorm<Eigen::Infinity>());
      int drop = -1;
      for (std::size_t k = 0; k < work.size(); ++k) {
        const double mu = mult(m_eq + static_cast<int>(k));
        if (mu >= -mult_tol) continue;
        if (drop < 0) {
          drop = static_cast<int>(k);
        } else if (stalled > n + m_in) {
          if (work[k] < work[drop]) drop = static_cast<int>(k);
        } else if (mu < mult(m_eq + drop)) {
          drop = static_cast<int>(k);
        }
      }
      if (drop >= 0) {
        in_work[work[drop]] = false;
        work.erase(work.begin() + drop);
        continue;
      }
      result.status = QpStatus::optimal;
      result.x = x;
      result.eq_multipliers = mult.head(m_eq);
      result.in_multipliers = Eigen::VectorXd::Zero(m_in);
      for (std::size_t k = 0; k < work.size(); ++k)
        result.in_multipliers(work[k]) = std::max(0.0, mult(m_eq + static_cast<int>(k)));
      return result;
    }

    double alpha = ray ? std::numeric_limits<double>::infinity() : 1.0;
    int blocking = -1;
    const double d_scale = d.lpNorm<Eigen::Infinity>();
    for (int i = 0; i < m_in; ++i) {
      if (in_work[i]) continue;
      const double ad = qp.a_in.row(i).dot(d);
      if (ad <= 1e-12 * d_scale * std::max(1.0, qp.a_in.row(i).lpNorm<Eigen::Infinity>())) continue;
      const double slack = std::max(0.0, qp.b_in(i) - qp.a_in.row(i).dot(x));
      const double step = slack / ad;
      if (step < alpha) {
        alpha = step;
        blocking = i;
      }
    }
    if (!std::isfinite(alpha)) {
      result.status = QpStatus::unbounded;
      result.x = x;
      return result;
    }
    x += alpha * d;
    stalled = alpha * d_scale <= tol * x_scale ? stalled + 1 : 0;
    if (blocking >= 0) {
      work.push_back(blocking);
      in_work[blocking] = true;
    }
  }
  result.status = QpStatus::iteration_limit;
  result.x = x;
  return result;
}

QpResult solve_qp(const QpProblem& qp, const Eigen::VectorXd& x_eq, double tol) {
  const int n = qp.size();
  const int m_in = static_cast<int>(qp.a_in.rows());
  const Eigen::VectorXd excess = qp.a_in * x_eq - qp.b_in;
  std::vector<int> violated;
  for (int i = 0; i < m_in; ++i)
    if (excess(i) > 0.0) violated.push_back(i);
  if (violated.empty()) return solve_qp_from(qp, x_eq, tol);

  // Phase one: minimize total elastic slack on the violated rows.
  const int k = static_cast<int>(violated.size());
  QpProblem phase1;
  phase1.hess_diag = Eigen::VectorXd::Zero(n + k);
  phase1.linear = Eigen::VectorXd::Zero(n + k);
  phase1.linear.tail(k).setOnes();
  phase1.a_eq = Eigen::MatrixXd::Zero(qp.a_eq.rows(), n + k);
  phase1.a_eq.leftCols(n) = qp.a_eq;
  phase1.b_eq = qp.b_eq;
  phase1.a_in = Eigen::MatrixXd::Zero(m_in + k, n + k);
  phase1.b_in = Eigen::VectorXd::Zero(m_in + k);
  phase1.a_in.topLeftCorner(m_in, n) = qp.a_in;
  phase1.b_in.head(m_in) = qp.b_in;
  Eigen::VectorXd start(n + k);
  start.head(n) = x_eq;
  for (int s = 0; s < k; ++s) {
    phase1.a_in(violated[s], n + s) = -1.0;
    phase1.a_in(m_in + s, n + s) = -1.0;
    start(n + s) = excess(violated[s]);
  }
  const QpResult feasible = solve_qp_from(phase1, start, tol);
  if (feasible.status != QpStatus::optimal) {
    QpResult out;
    out.status = feasible.status;
    out.x = feasible.x.head(n);
    return out;
  }
  const double residual = feasible.x.tail(k).sum();
  if (residual > 1e-7 * (1.0 + x_eq.lpNorm<Eigen::Infinity>())) {
    QpResult out;
    out.status = QpStatus::infeasible;
    out.x = feasible.x.head(n);
    return out;
  }
  QpResult out = solve_qp_from(qp, feasible.x.head(n), tol);
  out.iterations += feasible.iterations;
  return out;
}

double qp_kkt_residual(const QpProblem& qp, const QpResult& result) {
  const Eigen::VectorXd& x = result.x;
  Eigen::VectorXd r = qp.hess_diag.cwiseProduct(x) + qp.linear;
  double worst = 0.0;
  if (qp.a_eq.rows() > 0) {
    r += qp.a_eq.transpose() * result.eq_multipliers;
    worst = std::max(worst, (qp.a_eq * x - qp.b_eq).lpNorm<Eigen::Infinity>());
  }
  if (qp.a_in.rows() > 0) {
    r += qp.a_in.transpose() * result.in_multipliers;
    const Eigen::VectorXd slack = qp.b_in - qp.a_in * x;
    for (int i = 0; i < slack.size(); ++i) {
      worst = std::max(worst, -slack(i));
      worst = std::max(worst, -result.in_multipliers(i));
      worst = std::max(worst, std::abs(result.in_multipliers(i) * slack(i)));
    }
  }
  return std::max(worst, r.lpNorm<Eigen::Infinity>());
}

}  // namespace ucrl
