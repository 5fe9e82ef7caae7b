#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "planner/corridor.hpp"
#include "planner/nlp.hpp"
#include "planner/ocp.hpp"

namespace planner {

enum class Variant { Mpc, Recover, Homotopy, SensitivityUpdate, StopSafe };

enum class PlanStatus { Optimal, HomotopyPartial, SensitivityShifted, StopFallback, Recovered };

const char* to_string(Variant variant);
const char* to_string(PlanStatus status);
const char* to_string(SolveStatus status);

// Post-hoc violation tolerances, one per constraint family. These gate plan
// acceptance against the hard (zero-margin) constraints, so they sit strictly
// inside the solver's tightening margins.
struct SafetyTolerances {
  double progress = 0.25;
  double lateral = 0.05;
  double velocity = 0.1;
  double lateral_accel = 0.1;
  double control = 0.0;

  double of(ConstraintFamily family) const;
};

// Deviation limits between the measured state and the previous plan's
// prediction under which a first-order shifted plan is still trustworthy.
struct ValidityThresholds {
  double position = 0.2;  // [m]
  double heading = 0.1;   // [rad]
  double velocity = 0.5;  // [m/s]
};

struct CartesianNode {
  Vec2 position;
  double heading = 0.0;
  double kappa = 0.0;
  double v = 0.0;
};

// One accepted plan: road-frame and plane copies of the trajectory, the
// per-interval state-transition factors for first-order shifting, and
// bookkeeping for the trace.
struct PlanRecord {
  std::vector<EgoState> states;
  std::vector<EgoControl> controls;
  std::vector<CartesianNode> cartesian;
  std::vector<Eigen::Matrix<double, 5, 5>> step_transitions;
  PlanStatus status = PlanStatus::Optimal;
  double zeta_reached = 1.0;
  int iterations = 0;  // SQP iterations spent across every solve this tick
  int solves = 0;
  SolveStatus solver_status = SolveStatus::Converged;
  double dt = 0.0;
  std::array<double, kConstraintFamilies> max_residuals{};
};

// A tick where no strategy produced a safe plan.
class TickFailure : public std::runtime_error {
 public:
  TickFailure(Variant variant, const EgoState& location,
              const std::array<double, kConstraintFamilies>& residuals);

  Variant variant;
  EgoState location;
  std::array<double, kConstraintFamilies> residuals;
};

struct PlannerSettings {
  HorizonConfig horizon;
  ObjectiveWeights weights;
  ConstraintMargins margins;
  SafetyTolerances tolerances;
  ValidityThresholds validity;
  SqpSettings solver;
  int shift_nodes = 1;            // horizon shift applied by the fallback plan
  bool concurrent_backup = true;  // solve the stop problem on a worker thread
};

// True iff the trajectory satisfies the hard (zero-margin, fully augmented)
// constraints within the per-family tolerances and s never decreases.
bool is_safe(const std::vector<EgoState>& states, const std::vector<EgoControl>& controls,
             const Corridor& corridor, const SafetyTolerances& tolerances);

// Clamps controls into bounds nodewise and re-propagates the states from x0,
// making the trajectory dynamically consistent with admissible inputs.
void recover(std::vector<EgoState>& states, std::vector<EgoControl>& controls, const EgoState& x0,
             const Corridor& corridor, double dt);

// Whether the measured state is close enough to the previous plan's
// prediction for this instant (its node `shift`, re-expressed in the current
// road frame) to trust a first-order shifted plan. False without history.
bool is_valid(const EgoState& current, const PlanRecord* previous, const PathSpline2D& path,
              const ValidityThresholds& thresholds, int shift);

// Re-expresses the previous plan in the current frame, drops the first
// `shift` nodes, and applies the first-order state correction accumulated
// through the stored step transitions. Empty when re-projection fails.
std::optional<std::pair<std::vector<EgoState>, std::vector<EgoControl>>> sensitivity_shift(
    const PlanRecord& previous, const EgoState& current, const PathSpline2D& path, int shift);

class Planner {
 public:
  explicit Planner(const PlannerSettings& settings);

  // Runs the variant's strategy chain for one tick. Throws TickFailure when
  // no strategy yields a plan that passes is_safe.
  PlanRecord plan_step(Variant variant, const EgoState& x0, const Corridor& corridor,
                       const PlanRecord* previous);

  const PlannerSettings& settings() const { return settings_; }

 private:
  PlannerSettings settings_;
};

}  // namespace planner
