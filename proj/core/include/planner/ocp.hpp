#pragma once

#include <array>
#include <vector>

#include "planner/corridor.hpp"
#include "planner/dynamics.hpp"
#include "planner/nlp.hpp"

namespace planner {

struct HorizonConfig {
  double horizon = 3.5;  // T [s]
  int steps = 25;        // N
  double dt() const { return horizon / steps; }
};

struct ObjectiveWeights {
  double progress = 1.0;        // on -s(N)
  double lateral = 0.5;         // on d^2
  double heading = 1.0;         // on chi^2
  double curvature_rate = 5.0;  // on u1^2
  double accel = 0.5;           // on u2^2
  double speed = 2.0;           // on v^2, active in the stopping variant only
};

struct ConstraintMargins {
  double progress = 0.5;       // [m] backed off the stop point
  double lateral = 0.1;        // [m] inside each corridor bound
  double velocity = 0.2;       // [m/s] inside the speed band
  double lateral_accel = 0.2;  // [m/s^2] inside the comfort limit

  static ConstraintMargins zero() { return {0.0, 0.0, 0.0, 0.0}; }
};

// Families of the per-node path constraint rows, in tightening/tolerance
// granularity. Controls carry no margin.
enum class ConstraintFamily : int {
  Progress = 0,
  Lateral = 1,
  Velocity = 2,
  LateralAccel = 3,
  Control = 4,
};
inline constexpr int kConstraintFamilies = 5;
inline constexpr int kRowsPerNode = 11;

// Row layout within one node: progress cap, lateral lower/upper, velocity
// lower/upper, lateral-acceleration lower/upper, then the four control bounds.
ConstraintFamily row_family(int row);

// Signed per-node path-constraint residuals over a packed trajectory vector:
// positive entries are violations, negative entries have slack. Row count is
// kRowsPerNode * (node count).
Eigen::VectorXd evaluate_constraints(const Eigen::VectorXd& z, const Corridor& corridor,
                                     double zeta, const ConstraintMargins& margins);

// Direct transcription of the receding-horizon problem: trapezoidal defect
// equalities plus the margin-tightened path constraints per node. The
// stopping variant zeroes the progress reward and margins, turns on the
// speed penalty, and pins zeta to 1.
class OcpProblem final : public NlpProblem {
 public:
  OcpProblem(const Corridor& corridor, const EgoState& x0, const ObjectiveWeights& weights,
             const ConstraintMargins& margins, double zeta, const HorizonConfig& horizon,
             bool stop_mode = false);

  int variable_count() const override { return 7 * (horizon_.steps + 1); }
  int equality_count() const override { return 5 * (horizon_.steps + 1); }
  int inequality_count() const override { return kRowsPerNode * (horizon_.steps + 1); }

  double objective(const Eigen::VectorXd& z) const override;
  Eigen::VectorXd objective_gradient(const Eigen::VectorXd& z) const override;
  Eigen::VectorXd equalities(const Eigen::VectorXd& z) const override;
  Eigen::MatrixXd equality_jacobian(const Eigen::VectorXd& z) const override;
  Eigen::VectorXd inequalities(const Eigen::VectorXd& z) const override;
  Eigen::MatrixXd inequality_jacobian(const Eigen::VectorXd& z) const override;
  bool inequality_enforced(int row) const override;

  // Drops a whole family from the enforced subproblem (the rows stay in the
  // reported vectors). Used to study how each family shapes the optimum.
  void set_family_enabled(ConstraintFamily family, bool enabled);

  // Constant-speed rollout with zero controls, packed as a decision vector.
  Eigen::VectorXd initial_guess() const;

  // Whether the pinned initial state violates its own node constraints.
  bool infeasible_start() const { return infeasible_start_; }

  const HorizonConfig& horizon() const { return horizon_; }
  double zeta() const { return zeta_; }
  const ConstraintMargins& margins() const { return margins_; }
  bool stop_mode() const { return stop_mode_; }

  static int state_offset(int k) { return 7 * k; }
  static int control_offset(int k) { return 7 * k + 5; }
  static EgoState state_at(const Eigen::VectorXd& z, int k);
  static EgoControl control_at(const Eigen::VectorXd& z, int k);
  static Eigen::VectorXd pack(const std::vector<EgoState>& states,
                              const std::vector<EgoControl>& controls);
  static void unpack(const Eigen::VectorXd& z, std::vector<EgoState>& states,
                     std::vector<EgoControl>& controls);

 private:
  const Corridor* corridor_;
  EgoState x0_;
  ObjectiveWeights weights_;
  ConstraintMargins margins_;
  double zeta_;
  HorizonConfig horizon_;
  bool stop_mode_;
  bool infeasible_start_ = false;
  std::array<bool, kConstraintFamilies> family_enabled_;
};

}  // namespace planner
