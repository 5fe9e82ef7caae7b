#pragma once

#include <Eigen/Dense>

namespace planner {

struct QpResult {
  Eigen::VectorXd x;
  Eigen::VectorXd eq_multipliers;
  Eigen::VectorXd ineq_multipliers;  // nonnegative, one per inequality row
  bool feasible = true;
  int active_set_changes = 0;
};

// Minimizes 0.5 x'Hx + g'x subject to Ae x = be and Ai x >= bi, for symmetric
// positive definite H. Equalities are eliminated through a nullspace basis;
// the reduced strictly convex problem is solved with a dual active-set method.
// Throws std::invalid_argument on dimension mismatch and std::runtime_error
// when the equality rows are linearly dependent.
QpResult solve_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::MatrixXd& Ae,
                  const Eigen::VectorXd& be, const Eigen::MatrixXd& Ai,
                  const Eigen::VectorXd& bi);

}  // namespace planner
