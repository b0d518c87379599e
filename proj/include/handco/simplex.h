#pragma once

#include <Eigen/Dense>

namespace handco {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  double objective = 0.0;
  Eigen::VectorXd x;
};

/// maximize c'x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0.
/// Dense two-phase tableau simplex with Bland's rule; meant for problems
/// with at most a few hundred columns.
LpResult solve_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& a_ub, const Eigen::VectorXd& b_ub,
                  const Eigen::MatrixXd& a_eq, const Eigen::VectorXd& b_eq, double tol = 1e-10);

}  // namespace handco
