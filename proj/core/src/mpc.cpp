#include "planner/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <limits>
#include <utility>

#include "planner/errors.hpp"

namespace planner {

namespace {

Eigen::Matrix<double, 5, 1> to_vector(const EgoState& x) {
  Eigen::Matrix<double, 5, 1> v;
  v << x.s, x.d, x.chi, x.kappa, x.v;
  return v;
}

EgoState from_vector(const Eigen::Matrix<double, 5, 1>& v) {
  return {v(0), v(1), v(2), v(3), v(4)};
}

// Per-family worst residual of the hard (zero-margin, fully augmented)
// constraints over a candidate trajectory. Positive means violated.
std::array<double, kConstraintFamilies> residual_summary(const std::vector<EgoState>& states,
                                                         const std::vector<EgoControl>& controls,
                                                         const Corridor& corridor) {
  std::array<double, kConstraintFamilies> worst{};
  worst.fill(-std::numeric_limits<double>::infinity());
  const Eigen::VectorXd violation = evaluate_constraints(
      OcpProblem::pack(states, controls), corridor, 1.0, ConstraintMargins::zero());
  // Node 0 is the measured state; its pure state rows (the first seven) are
  // outside the plan's control and are skipped here as in the solver.
  for (int r = 7; r < violation.size(); ++r) {
    double& slot = worst[static_cast<int>(row_family(r % kRowsPerNode))];
    slot = std::max(slot, violation(r));
  }
  return worst;
}

// Re-expresses a stored plan in the frame of the given (possibly refitted)
// path. Curvature and speed carry over unchanged; pose comes from projecting
// the plane-frame copy. Fails when some node left the projection radius.
std::optional<std::pair<std::vector<EgoState>, std::vector<EgoControl>>> reproject_plan(
    const PlanRecord& previous, const PathSpline2D& path) {
  std::vector<EgoState> states;
  states.reserve(previous.cartesian.size());
  try {
    for (const CartesianNode& node : previous.cartesian) {
      const FrenetPose pose = path.project(node.position, node.heading);
      states.push_back({pose.s, pose.d, pose.heading_diff, node.kappa, node.v});
    }
  } catch (const NoProjection&) {
    return std::nullopt;
  }
  return std::make_pair(std::move(states), std::vector<EgoControl>(previous.controls));
}

// Warm start for the next solve: the previous plan re-expressed in the
// current frame, advanced by `shift` nodes, tail padded by repeating the
// final state with idle controls, and the first node pinned to the
// measurement. Falls back to nullopt when there is nothing usable.
std::optional<Eigen::VectorXd> warm_start(const PlanRecord* previous, const EgoState& x0,
                                          const PathSpline2D& path, int nodes, int shift) {
  if (previous == nullptr || previous->states.size() < 2) return std::nullopt;
  auto reprojected = reproject_plan(*previous, path);
  if (!reprojected) return std::nullopt;
  auto& [states, controls] = *reprojected;

  const int start = std::min<int>(shift, static_cast<int>(states.size()) - 1);
  std::vector<EgoState> shifted_states(states.begin() + start, states.end());
  std::vector<EgoControl> shifted_controls(controls.begin() + start, controls.end());
  shifted_states[0] = x0;
  while (static_cast<int>(shifted_states.size()) < nodes) {
    shifted_states.push_back(shifted_states.back());
    shifted_controls.push_back({0.0, 0.0});
  }
  shifted_states.resize(nodes);
  shifted_controls.resize(nodes);
  return OcpProblem::pack(shifted_states, shifted_controls);
}

// Braking rollout used to seed the stop problem: zero steering rate and the
// strongest deceleration that keeps the speed nonnegative across each step.
Eigen::VectorXd stop_seed(const EgoState& x0, const Corridor& corridor,
                          const HorizonConfig& horizon) {
  const double dt = horizon.dt();
  const ControlBounds& bounds = corridor.control_bounds();
  std::vector<EgoState> states(horizon.steps + 1);
  std::vector<EgoControl> controls(horizon.steps + 1, {0.0, 0.0});
  states[0] = x0;
  for (int k = 0; k < horizon.steps; ++k) {
    const double brake = std::max(bounds.u2_min, -states[k].v / dt);
    controls[k] = {0.0, std::min(brake, 0.0)};
    states[k + 1] = rk4_ego(states[k], controls[k], corridor.path(), dt);
    states[k + 1].v = std::max(states[k + 1].v, 0.0);
  }
  return OcpProblem::pack(states, controls);
}

struct SolveOutcome {
  std::vector<EgoState> states;
  std::vector<EgoControl> controls;
  NlpSolution solution;
};

SolveOutcome solve_stage(const Corridor& corridor, const EgoState& x0,
                         const PlannerSettings& settings, double zeta, bool stop_mode,
                         const std::optional<Eigen::VectorXd>& guess) {
  OcpProblem problem(corridor, x0, settings.weights, settings.margins, zeta, settings.horizon,
                     stop_mode);
  SolveOutcome outcome;
  outcome.solution = solve_sqp(problem, guess ? *guess : problem.initial_guess(), settings.solver);
  OcpProblem::unpack(outcome.solution.z, outcome.states, outcome.controls);
  // Active control bounds hold exactly at a solution; the reduced-space
  // roundtrip can leave one-ulp spill that a zero-tolerance check would
  // reject, so snap controls sitting within roundoff back onto the rail.
  const ControlBounds& bounds = corridor.control_bounds();
  constexpr double kSnap = 1e-9;
  for (EgoControl& u : outcome.controls) {
    if (std::abs(u.u1 - bounds.u1_min) < kSnap) u.u1 = bounds.u1_min;
    if (std::abs(u.u1 - bounds.u1_max) < kSnap) u.u1 = bounds.u1_max;
    if (std::abs(u.u2 - bounds.u2_min) < kSnap) u.u2 = bounds.u2_min;
    if (std::abs(u.u2 - bounds.u2_max) < kSnap) u.u2 = bounds.u2_max;
  }
  return outcome;
}

}  // namespace

const char* to_string(Variant variant) {
  switch (variant) {
    case Variant::Mpc: return "mpc";
    case Variant::Recover: return "re";
    case Variant::Homotopy: return "hb";
    case Variant::SensitivityUpdate: return "su";
    case Variant::StopSafe: return "ss";
  }
  return "?";
}

const char* to_string(PlanStatus status) {
  switch (status) {
    case PlanStatus::Optimal: return "optimal";
    case PlanStatus::HomotopyPartial: return "homotopy-partial";
    case PlanStatus::SensitivityShifted: return "sensitivity-shifted";
    case PlanStatus::StopFallback: return "stop-fallback";
    case PlanStatus::Recovered: return "recovered";
  }
  return "?";
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::IterationLimit: return "iteration-limit";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "?";
}

double SafetyTolerances::of(ConstraintFamily family) const {
  switch (family) {
    case ConstraintFamily::Progress: return progress;
    case ConstraintFamily::Lateral: return lateral;
    case ConstraintFamily::Velocity: return velocity;
    case ConstraintFamily::LateralAccel: return lateral_accel;
    case ConstraintFamily::Control: return control;
  }
  return 0.0;
}

TickFailure::TickFailure(Variant variant_in, const EgoState& location_in,
                         const std::array<double, kConstraintFamilies>& residuals_in)
    : std::runtime_error("no safe plan found"),
      variant(variant_in),
      location(location_in),
      residuals(residuals_in) {}

bool is_safe(const std::vector<EgoState>& states, const std::vector<EgoControl>& controls,
             const Corridor& corridor, const SafetyTolerances& tolerances) {
  if (states.empty() || states.size() != controls.size()) return false;
  // Slack sized so a standstill plan survives solver roundoff; anything a
  // vehicle could physically notice is many orders of magnitude larger.
  for (size_t k = 0; k + 1 < states.size(); ++k) {
    if (states[k + 1].s < states[k].s - 1e-7) return false;
  }
  const Eigen::VectorXd violation = evaluate_constraints(
      OcpProblem::pack(states, controls), corridor, 1.0, ConstraintMargins::zero());
  // The first seven rows judge the measured initial state, which no plan can
  // alter; the certificate covers the decisions, so those rows are skipped.
  for (int r = 7; r < violation.size(); ++r) {
    if (violation(r) > tolerances.of(row_family(r % kRowsPerNode))) return false;
  }
  return true;
}

void recover(std::vector<EgoState>& states, std::vector<EgoControl>& controls, const EgoState& x0,
             const Corridor& corridor, double dt) {
  if (states.empty() || states.size() != controls.size()) {
    throw std::invalid_argument("recover: trajectory arrays empty or mismatched");
  }
  const ControlBounds& bounds = corridor.control_bounds();
  for (EgoControl& u : controls) u = bounds.clamp(u);
  states[0] = x0;
  for (size_t k = 0; k + 1 < states.size(); ++k) {
    states[k + 1] = rk4_ego(states[k], controls[k], corridor.path(), dt);
  }
}

bool is_valid(const EgoState& current, const PlanRecord* previous, const PathSpline2D& path,
              const ValidityThresholds& thresholds, int shift) {
  if (previous == nullptr) return false;
  // The shifted plan needs at least two nodes left to be worth executing.
  if (static_cast<int>(previous->cartesian.size()) < shift + 2) return false;
  const CartesianNode& predicted = previous->cartesian[shift];
  const auto [position, heading] = path.to_cartesian({current.s, current.d, current.chi});
  if (distance(position, predicted.position) > thresholds.position) return false;
  if (std::abs(wrap_angle(heading - predicted.heading)) > thresholds.heading) return false;
  if (std::abs(current.v - predicted.v) > thresholds.velocity) return false;
  return true;
}

std::optional<std::pair<std::vector<EgoState>, std::vector<EgoControl>>> sensitivity_shift(
    const PlanRecord& previous, const EgoState& current, const PathSpline2D& path, int shift) {
  if (static_cast<int>(previous.cartesian.size()) < shift + 2) return std::nullopt;
  if (previous.step_transitions.size() + 1 != previous.cartesian.size()) return std::nullopt;
  auto reprojected = reproject_plan(previous, path);
  if (!reprojected) return std::nullopt;
  const auto& [states, controls] = *reprojected;

  const int count = static_cast<int>(states.size()) - shift;
  std::vector<EgoState> shifted(count);
  std::vector<EgoControl> shifted_controls(controls.begin() + shift, controls.end());
  // First-order correction: the measured deviation at the shifted head node,
  // transported down the horizon through the stored step transitions.
  Eigen::Matrix<double, 5, 1> delta = to_vector(current) - to_vector(states[shift]);
  for (int j = 0; j < count; ++j) {
    shifted[j] = from_vector(to_vector(states[shift + j]) + delta);
    if (j + 1 < count) delta = previous.step_transitions[shift + j] * delta;
  }
  shifted[0] = current;
  return std::make_pair(std::move(shifted), std::move(shifted_controls));
}

Planner::Planner(const PlannerSettings& settings) : settings_(settings) {
  if (settings_.shift_nodes < 1) throw std::invalid_argument("shift_nodes must be at least 1");
  if (settings_.horizon.steps < 2) throw std::invalid_argument("horizon needs at least 2 steps");
}

PlanRecord Planner::plan_step(Variant variant, const EgoState& x0, const Corridor& corridor,
                              const PlanRecord* previous) {
  const PathSpline2D& path = corridor.path();
  const double dt = settings_.horizon.dt();
  const int nodes = settings_.horizon.steps + 1;

  auto finish = [&](std::vector<EgoState> states, std::vector<EgoControl> controls,
                    PlanStatus status, double zeta, int iterations, int solves,
                    SolveStatus solver_status) {
    PlanRecord record;
    record.max_residuals = residual_summary(states, controls, corridor);
    record.states = std::move(states);
    record.controls = std::move(controls);
    record.status = status;
    record.zeta_reached = zeta;
    record.iterations = iterations;
    record.solves = solves;
    record.solver_status = solver_status;
    record.dt = dt;
    record.cartesian.reserve(record.states.size());
    for (const EgoState& x : record.states) {
      const auto [position, heading] = path.to_cartesian({x.s, x.d, x.chi});
      record.cartesian.push_back({position, heading, x.kappa, x.v});
    }
    record.step_transitions.reserve(record.states.size() - 1);
    const Eigen::Matrix<double, 5, 5> identity = Eigen::Matrix<double, 5, 5>::Identity();
    Eigen::Matrix<double, 5, 5> ahead = state_jacobian(path, record.states[0]);
    for (size_t k = 0; k + 1 < record.states.size(); ++k) {
      const Eigen::Matrix<double, 5, 5> behind = ahead;
      ahead = state_jacobian(path, record.states[k + 1]);
      record.step_transitions.push_back((identity - 0.5 * dt * ahead)
                                            .partialPivLu()
                                            .solve(identity + 0.5 * dt * behind));
    }
    return record;
  };

  auto fail = [&](const std::vector<EgoState>& states,
                  const std::vector<EgoControl>& controls) -> TickFailure {
    // Debugging aid: dump the rejected candidate nodewise when asked.
    if (std::getenv("PLANNER_DUMP_FAILURE") != nullptr) {
      const Eigen::VectorXd violation = evaluate_constraints(
          OcpProblem::pack(states, controls), corridor, 1.0, ConstraintMargins::zero());
      std::fprintf(stderr, "rejected candidate (%zu nodes):\n", states.size());
      for (size_t k = 0; k < states.size(); ++k) {
        double worst = -1e300;
        int worst_row = 0;
        for (int r = 0; r < kRowsPerNode; ++r) {
          const double value = violation(static_cast<int>(k) * kRowsPerNode + r);
          if (value > worst) { worst = value; worst_row = r; }
        }
        std::fprintf(stderr,
                     "  k=%2zu s=%8.3f d=%+7.3f chi=%+7.3f kap=%+8.4f v=%6.3f "
                     "u1=%+7.3f u2=%+7.3f worst_row=%d resid=%+9.4f\n",
                     k, states[k].s, states[k].d, states[k].chi, states[k].kappa, states[k].v,
                     controls[k].u1, controls[k].u2, worst_row, worst);
      }
    }
    return TickFailure(variant, x0, residual_summary(states, controls, corridor));
  };

  const std::optional<Eigen::VectorXd> warm =
      warm_start(previous, x0, path, nodes, settings_.shift_nodes);

  switch (variant) {
    case Variant::Mpc: {
      SolveOutcome out = solve_stage(corridor, x0, settings_, 1.0, false, warm);
      if (is_safe(out.states, out.controls, corridor, settings_.tolerances)) {
        return finish(std::move(out.states), std::move(out.controls), PlanStatus::Optimal, 1.0,
                      out.solution.iterations, 1, out.solution.status);
      }
      throw fail(out.states, out.controls);
    }

    case Variant::Recover: {
      SolveOutcome out = solve_stage(corridor, x0, settings_, 1.0, false, warm);
      if (is_safe(out.states, out.controls, corridor, settings_.tolerances)) {
        return finish(std::move(out.states), std::move(out.controls), PlanStatus::Optimal, 1.0,
                      out.solution.iterations, 1, out.solution.status);
      }
      recover(out.states, out.controls, x0, corridor, dt);
      if (is_safe(out.states, out.controls, corridor, settings_.tolerances)) {
        return finish(std::move(out.states), std::move(out.controls), PlanStatus::Recovered, 1.0,
                      out.solution.iterations, 1, out.solution.status);
      }
      throw fail(out.states, out.controls);
    }

    case Variant::Homotopy: {
      const std::vector<double> schedule = corridor.homotopy_schedule();
      std::optional<SolveOutcome> best;
      double best_zeta = 0.0;
      std::optional<Eigen::VectorXd> guess = warm;
      int iterations = 0;
      SolveOutcome out;
      for (double zeta : schedule) {
        out = solve_stage(corridor, x0, settings_, zeta, false, guess);
        iterations += out.solution.iterations;
        guess = out.solution.z;
        if (is_safe(out.states, out.controls, corridor, settings_.tolerances)) {
          best = out;
          best_zeta = zeta;
        }
      }
      const int solves = static_cast<int>(schedule.size());
      if (best && best_zeta == schedule.back()) {
        return finish(std::move(best->states), std::move(best->controls), PlanStatus::Optimal,
                      best_zeta, iterations, solves, best->solution.status);
      }
      if (best) {
        return finish(std::move(best->states), std::move(best->controls),
                      PlanStatus::HomotopyPartial, best_zeta, iterations, solves,
                      best->solution.status);
      }
      throw fail(out.states, out.controls);
    }

    case Variant::SensitivityUpdate: {
      SolveOutcome out = solve_stage(corridor, x0, settings_, 1.0, false, warm);
      if (is_safe(out.states, out.controls, corridor, settings_.tolerances)) {
        return finish(std::move(out.states), std::move(out.controls), PlanStatus::Optimal, 1.0,
                      out.solution.iterations, 1, out.solution.status);
      }
      recover(out.states, out.controls, x0, corridor, dt);
      if (is_safe(out.states, out.controls, corridor, settings_.tolerances)) {
        return finish(std::move(out.states), std::move(out.controls), PlanStatus::Recovered, 1.0,
                      out.solution.iterations, 1, out.solution.status);
      }
      if (previous != nullptr &&
          is_valid(x0, previous, path, settings_.validity, settings_.shift_nodes)) {
        auto shifted = sensitivity_shift(*previous, x0, path, settings_.shift_nodes);
        if (shifted) {
          if (is_safe(shifted->first, shifted->second, corridor, settings_.tolerances)) {
            return finish(std::move(shifted->first), std::move(shifted->second),
                          PlanStatus::SensitivityShifted, 1.0, out.solution.iterations, 1,
                          out.solution.status);
          }
          throw fail(shifted->first, shifted->second);
        }
      }
      throw fail(out.states, out.controls);
    }

    case Variant::StopSafe: {
      auto solve_backup = [&] { return solve_stage(corridor, x0, settings_, 1.0, true,
                                                   stop_seed(x0, corridor, settings_.horizon)); };
      std::future<SolveOutcome> backup_future;
      if (settings_.concurrent_backup) {
        backup_future = std::async(std::launch::async, solve_backup);
      }
      SolveOutcome out = solve_stage(corridor, x0, settings_, 1.0, false, warm);
      SolveOutcome backup =
          settings_.concurrent_backup ? backup_future.get() : solve_backup();
      const int iterations = out.solution.iterations + backup.solution.iterations;
      if (is_safe(out.states, out.controls, corridor, settings_.tolerances)) {
        return finish(std::move(out.states), std::move(out.controls), PlanStatus::Optimal, 1.0,
                      iterations, 2, out.solution.status);
      }
      recover(out.states, out.controls, x0, corridor, dt);
      if (is_safe(out.states, out.controls, corridor, settings_.tolerances)) {
        return finish(std::move(out.states), std::move(out.controls), PlanStatus::Recovered, 1.0,
                      iterations, 2, out.solution.status);
      }
      if (is_safe(backup.states, backup.controls, corridor, settings_.tolerances)) {
        return finish(std::move(backup.states), std::move(backup.controls),
                      PlanStatus::StopFallback, 1.0, iterations, 2, backup.solution.status);
      }
      throw fail(backup.states, backup.controls);
    }
  }
  throw std::logic_error("unreachable variant");
}

}  // namespace planner
