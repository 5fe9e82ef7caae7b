#pragma once

#include <array>
#include <string>
#include <vector>

#include "planner/mpc.hpp"
#include "planner/scenario.hpp"

namespace planner {

enum class Outcome { Completed, HaltedAtBlockade, Failed };

const char* to_string(Outcome outcome);

// One closed-loop tick as logged: state at the tick instant (before the
// control is applied), what the planner produced, and how much it cost.
struct TraceRow {
  int tick = 0;
  double time = 0.0;
  EgoControl applied;
  Vec2 position{0.0, 0.0};
  double heading = 0.0;
  EgoState frenet;  // relative to the full reference path
  PlanStatus status = PlanStatus::Optimal;
  double zeta = 1.0;
  int iterations = 0;
  int solves = 0;
  double wall_ms = 0.0;
  std::array<double, kConstraintFamilies> residuals{};
};

// Corridor cross-section at one arc length, sampled at both homotopy
// endpoints of the tick's local corridor.
struct SnapshotRow {
  int tick = 0;
  double s_global = 0.0;
  double d_lo_base = 0.0;
  double d_hi_base = 0.0;
  double d_lo_full = 0.0;
  double d_hi_full = 0.0;
  double v_cap = 0.0;
};

struct SimOptions {
  Variant variant = Variant::Mpc;
  int max_ticks = 0;        // overrides the scenario when positive
  unsigned seed = 0;        // echoed into the emitted artifacts
  int iteration_cap = 0;    // overrides the solver cap when positive
  int homotopy_stages = 0;  // overrides the schedule length when positive
  double snapshot_step = 0.25;
};

struct SimResult {
  Outcome outcome = Outcome::Failed;
  std::string reason;            // set for Failed and HaltedAtBlockade
  EgoState failure_location;     // frenet state (full path) when Failed
  std::vector<TraceRow> trace;
  std::vector<SnapshotRow> snapshots;
  std::vector<std::vector<Vec2>> plan_paths;  // accepted local plans, plane frame
  double min_speed = 0.0;
  double final_progress = 0.0;
  bool collision = false;
  int collision_tick = -1;
  double mean_solve_ms = 0.0;
  double max_solve_ms = 0.0;
};

// Runs the closed loop: per tick, re-extract the local window, rebuild the
// corridor, plan, apply the first control to the plane-frame ego truth, and
// advance the obstacles. Throws ScenarioError on setup problems (bad
// geometry, start or obstacles outside the capture radius).
SimResult run_simulation(const Scenario& scenario, const SimOptions& options);

}  // namespace planner
