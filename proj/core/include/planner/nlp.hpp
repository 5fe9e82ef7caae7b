#pragma once

#include <Eigen/Dense>
#include <vector>

namespace planner {

enum class SolveStatus { Converged, IterationLimit, Infeasible };

struct SqpSettings {
  int max_iterations = 30;
  double kkt_tolerance = 1e-6;
  double constraint_tolerance = 1e-6;
  int max_line_search_steps = 25;
  double armijo_coefficient = 1e-4;
  double infeasibility_ratio = 1e3;  // violation above ratio * tolerance => Infeasible
};

struct NlpSolution {
  Eigen::VectorXd z;
  SolveStatus status = SolveStatus::IterationLimit;
  int iterations = 0;
  double objective = 0.0;
  double constraint_violation = 0.0;  // infinity norm over equalities and enforced inequalities
  std::vector<double> merit_history;  // merit value at every accepted iterate
  Eigen::VectorXd eq_multipliers;
  Eigen::VectorXd ineq_multipliers;  // full inequality dimension; unenforced rows stay zero
  Eigen::VectorXd equality_values;
  Eigen::VectorXd inequality_values;
};

// Smooth program: minimize f(z) subject to c_eq(z) = 0 and c_in(z) >= 0.
class NlpProblem {
 public:
  virtual ~NlpProblem() = default;

  virtual int variable_count() const = 0;
  virtual int equality_count() const = 0;
  virtual int inequality_count() const = 0;

  virtual double objective(const Eigen::VectorXd& z) const = 0;
  virtual Eigen::VectorXd objective_gradient(const Eigen::VectorXd& z) const = 0;
  virtual Eigen::VectorXd equalities(const Eigen::VectorXd& z) const = 0;
  virtual Eigen::MatrixXd equality_jacobian(const Eigen::VectorXd& z) const = 0;
  virtual Eigen::VectorXd inequalities(const Eigen::VectorXd& z) const = 0;
  virtual Eigen::MatrixXd inequality_jacobian(const Eigen::VectorXd& z) const = 0;

  // Rows reported by inequalities() but excluded from the solver subproblem.
  // Lets a problem keep rows that are fixed by equality constraints (and thus
  // unimprovable) out of the feasibility logic while still reporting them.
  virtual bool inequality_enforced(int /*row*/) const { return true; }
};

NlpSolution solve_sqp(const NlpProblem& problem, const Eigen::VectorXd& initial_guess,
                      const SqpSettings& settings = {});

}  // namespace planner
