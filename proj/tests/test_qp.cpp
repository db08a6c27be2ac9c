#include <gtest/gtest.h>

#include "ucrl/qp.hpp"

using namespace ucrl;

namespace {

QpProblem box_problem(Eigen::VectorXd h, Eigen::VectorXd g, double total, Eigen::VectorXd hi) {
  const int n = static_cast<int>(g.size());
  QpProblem qp;
  qp.hess_diag = std::move(h);
  qp.linear = std::move(g);
  qp.a_eq = Eigen::MatrixXd::Ones(1, n);
  qp.b_eq = Eigen::VectorXd::Constant(1, total);
  qp.a_in.resize(2 * n, n);
  qp.a_in.setZero();
  qp.b_in.resize(2 * n);
  for (int i = 0; i < n; ++i) {
    qp.a_in(i, i) = 1.0;
    qp.b_in(i) = hi(i);
    qp.a_in(n + i, i) = -1.0;
    qp.b_in(n + i) = 0.0;
  }
  return qp;
}

}  // namespace

TEST(Qp, StrictlyConvexInterior) {
  // min x^2 + y^2 s.t. x + y = 2 -> (1, 1)
  const auto qp = box_problem(Eigen::Vector2d(2, 2), Eigen::Vector2d(0, 0), 2.0, Eigen::Vector2d(10, 10));
  const auto r = solve_qp(qp, Eigen::Vector2d(2, 0));
  ASSERT_EQ(r.status, QpStatus::optimal);
  EXPECT_NEAR(r.x(0), 1.0, 1e-9);
  EXPECT_NEAR(r.x(1), 1.0, 1e-9);
  EXPECT_LE(qp_kkt_residual(qp, r), 1e-9);
}

TEST(Qp, BoundBecomesActive) {
  // min x^2 + 4y... pushes everything to x until its bound.
  const auto qp = box_problem(Eigen::Vector2d(0.02, 0.02), Eigen::Vector2d(10, 20), 150.0, Eigen::Vector2d(100, 100));
  const auto r = solve_qp(qp, Eigen::Vector2d(75, 75));
  ASSERT_EQ(r.status, QpStatus::optimal);
  EXPECT_NEAR(r.x(0), 100.0, 1e-9);
  EXPECT_NEAR(r.x(1), 50.0, 1e-9);
  EXPECT_GE(r.in_multipliers.minCoeff(), -1e-12);
  EXPECT_LE(qp_kkt_residual(qp, r), 1e-9);
}

TEST(Qp, LinearObjective) {
  const auto qp = box_problem(Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(3, 1, 2), 12.0, Eigen::Vector3d(5, 5, 5));
  const auto r = solve_qp(qp, Eigen::Vector3d(4, 4, 4));
  ASSERT_EQ(r.status, QpStatus::optimal);
  EXPECT_NEAR(r.x(1), 5.0, 1e-9);
  EXPECT_NEAR(r.x(2), 5.0, 1e-9);
  EXPECT_NEAR(r.x(0), 2.0, 1e-9);
  EXPECT_NEAR(qp.objective(r.x), 6 + 5 + 10, 1e-9);
}

TEST(Qp, DetectsInfeasibleBox) {
  const auto qp = box_problem(Eigen::Vector2d(1, 1), Eigen::Vector2d(0, 0), 30.0, Eigen::Vector2d(10, 10));
  const auto r = solve_qp(qp, Eigen::Vector2d(15, 15));
  EXPECT_EQ(r.status, QpStatus::infeasible);
}
