#include "planner/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <memory>
#include <optional>

#include "planner/errors.hpp"
#include "planner/geometry.hpp"

namespace planner {

namespace {

// Plane-frame ego truth, integrated independently of the planner's road
// model: x' = v cos(theta), y' = v sin(theta), theta' = kappa v,
// kappa' = u1, v' = u2.
struct TruthState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double kappa = 0.0;
  double v = 0.0;
};

TruthState operator+(const TruthState& a, const TruthState& b) {
  return {a.x + b.x, a.y + b.y, a.theta + b.theta, a.kappa + b.kappa, a.v + b.v};
}
TruthState operator*(const TruthState& a, double c) {
  return {a.x * c, a.y * c, a.theta * c, a.kappa * c, a.v * c};
}

TruthState truth_derivative(const TruthState& t, const EgoControl& u) {
  return {t.v * std::cos(t.theta), t.v * std::sin(t.theta), t.kappa * t.v, u.u1, u.u2};
}

// Ground-truth obstacle: an integrated anchor plus the footprint held rigid
// around it as polar offsets, mirroring the predictor's transport rule.
struct ObstacleTruth {
  ObstacleMotionModel model;
  PlanarMotionState anchor;
  std::vector<double> radii;
  std::vector<double> angles;
  double safety_margin = 0.0;
  double body_radius = 0.0;

  std::vector<Vec2> corners() const {
    std::vector<Vec2> out;
    out.reserve(radii.size());
    for (size_t i = 0; i < radii.size(); ++i) {
      const double a = anchor.theta + angles[i];
      out.push_back({anchor.x + radii[i] * std::cos(a), anchor.y + radii[i] * std::sin(a)});
    }
    return out;
  }
};

ObstacleTruth make_obstacle_truth(const Obstacle& obstacle) {
  if (obstacle.footprint.empty()) throw ScenarioError("obstacle footprint is empty");
  ObstacleTruth truth;
  truth.model = obstacle.motion;
  truth.safety_margin = obstacle.safety_margin;
  Vec2 centroid{0.0, 0.0};
  for (const Vec2& p : obstacle.footprint) centroid = centroid + p;
  centroid = centroid / static_cast<double>(obstacle.footprint.size());
  truth.anchor = {centroid.x, centroid.y, obstacle.heading, obstacle.motion.speed};
  for (const Vec2& p : obstacle.footprint) {
    const Vec2 offset = p - centroid;
    truth.radii.push_back(offset.norm());
    truth.angles.push_back(std::atan2(offset.y, offset.x) - obstacle.heading);
    truth.body_radius = std::max(truth.body_radius, offset.norm());
  }
  return truth;
}

std::array<Vec2, 4> ego_box(const TruthState& t, const EgoGeometry& geometry) {
  const double c = std::cos(t.theta);
  const double s = std::sin(t.theta);
  auto body = [&](double lx, double ly) -> Vec2 {
    return {t.x + lx * c - ly * s, t.y + lx * s + ly * c};
  };
  const double half = geometry.width / 2.0;
  return {body(geometry.front_length, half), body(geometry.front_length, -half),
          body(-geometry.back_length, -half), body(-geometry.back_length, half)};
}

// Fits a 1D boundary spline over the local window: knots are the window
// samples' local arc lengths, values come from the full-road boundary.
BoundarySpline1D local_boundary(const std::vector<double>& local_s,
                                const std::vector<double>& global_s,
                                const BoundarySpline1D& global_boundary) {
  std::vector<double> values;
  values.reserve(global_s.size());
  for (double s : global_s) values.push_back(global_boundary.value(s));
  return BoundarySpline1D(local_s, values);
}

}  // namespace

const char* to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Completed: return "completed";
    case Outcome::HaltedAtBlockade: return "halted-at-blockade";
    case Outcome::Failed: return "failed";
  }
  return "?";
}

SimResult run_simulation(const Scenario& scenario, const SimOptions& options) {
  // Window geometry: how far the per-tick corridor extends around the ego,
  // how densely the local path is refit, and when a standstill counts as a
  // final halt.
  constexpr double kAheadWindow = 60.0;
  constexpr double kBehindWindow = 5.0;
  constexpr double kPathSampleStep = 2.0;
  constexpr double kHaltSpeed = 0.05;
  constexpr int kHaltTicks = 15;

  PathSpline2D global_path;
  try {
    global_path = PathSpline2D::fit(scenario.path_points);
  } catch (const std::exception& e) {
    throw ScenarioError(std::string("path: ") + e.what());
  }
  const double total_length = global_path.length();

  // The boundary point lists are projected onto the reference path once, then
  // kept as offset splines over full-road arc length.
  auto project_boundary = [&](const std::vector<Vec2>& points,
                              const char* side) -> BoundarySpline1D {
    std::vector<double> s_values;
    std::vector<double> d_values;
    try {
      for (const Vec2& p : points) {
        const FrenetPose pose = global_path.project(p, 0.0);
        if (!s_values.empty() && pose.s <= s_values.back() + 1e-9) continue;
        s_values.push_back(pose.s);
        d_values.push_back(pose.d);
      }
    } catch (const NoProjection&) {
      throw ScenarioError(std::string(side) + " boundary: point beyond the capture radius");
    }
    if (s_values.size() < 2) {
      throw ScenarioError(std::string(side) + " boundary: too few distinct projections");
    }
    return BoundarySpline1D(std::move(s_values), std::move(d_values));
  };
  const BoundarySpline1D global_right = project_boundary(scenario.right_points, "right");
  const BoundarySpline1D global_left = project_boundary(scenario.left_points, "left");
  for (double s = 0.0; s <= total_length; s += 1.0) {
    if (global_left.value(s) - global_right.value(s) <= 0.0) {
      throw ScenarioError("boundaries cross at s = " + std::to_string(s));
    }
  }

  std::vector<ObstacleTruth> obstacles;
  obstacles.reserve(scenario.obstacles.size());
  for (size_t i = 0; i < scenario.obstacles.size(); ++i) {
    ObstacleTruth truth = make_obstacle_truth(scenario.obstacles[i]);
    try {
      global_path.project({truth.anchor.x, truth.anchor.y}, truth.anchor.theta);
    } catch (const NoProjection&) {
      throw ScenarioError("obstacles[" + std::to_string(i) + "]: beyond the capture radius");
    }
    obstacles.push_back(std::move(truth));
  }

  TruthState truth;
  truth.x = scenario.start_position.x;
  truth.y = scenario.start_position.y;
  truth.theta = scenario.start_heading;
  truth.v = scenario.start_speed;
  try {
    const FrenetPose start = global_path.project(scenario.start_position, scenario.start_heading);
    truth.kappa = global_path.curvature_clamped(start.s);
  } catch (const NoProjection&) {
    throw ScenarioError("ego.start: beyond the capture radius");
  }

  const double finish = scenario.finish_progress >= 0.0
                            ? std::min(scenario.finish_progress, total_length)
                            : std::max(0.0, total_length - 15.0);
  const int max_ticks = options.max_ticks > 0 ? options.max_ticks : scenario.max_ticks;
  const double dt = scenario.horizon.dt();

  PlannerSettings settings;
  settings.horizon = scenario.horizon;
  settings.weights = scenario.weights;
  settings.margins = scenario.margins;
  settings.tolerances = scenario.tolerances;
  settings.validity = scenario.validity;
  if (options.iteration_cap > 0) settings.solver.max_iterations = options.iteration_cap;
  Planner planner(settings);

  CorridorConfig corridor_config = scenario.corridor;
  if (options.homotopy_stages > 0) corridor_config.homotopy_stages = options.homotopy_stages;

  SimResult result;
  result.min_speed = truth.v;
  std::optional<PlanRecord> previous;
  int halt_streak = 0;
  double wall_total = 0.0;
  auto finalize = [&]() -> SimResult& {
    if (!result.trace.empty()) result.mean_solve_ms = wall_total / result.trace.size();
    return result;
  };

  for (int tick = 0; tick < max_ticks; ++tick) {
    FrenetPose global_pose;
    try {
      global_pose = global_path.project({truth.x, truth.y}, truth.theta);
    } catch (const NoProjection&) {
      result.outcome = Outcome::Failed;
      result.reason = "ego left the road corridor";
      result.failure_location = {result.final_progress, 0.0, 0.0, truth.kappa, truth.v};
      return finalize();
    }
    result.final_progress = global_pose.s;
    const EgoState global_state{global_pose.s, global_pose.d, global_pose.heading_diff,
                                truth.kappa, truth.v};

    if (global_pose.s >= finish) {
      result.outcome = Outcome::Completed;
      return finalize();
    }

    // Post-hoc collision certificate against the exact footprints.
    if (!result.collision) {
      const auto box = ego_box(truth, scenario.ego);
      for (const ObstacleTruth& obstacle : obstacles) {
        const std::vector<Vec2> hull = prepare_footprint(obstacle.corners(), 1e-6);
        if (convex_polygons_intersect(box, hull)) {
          result.collision = true;
          result.collision_tick = tick;
          break;
        }
      }
    }

    // Local window re-extraction: refit the path over [s - behind, s + ahead]
    // and rebuild the boundary splines over the refit arc length.
    const double window_lo = std::max(0.0, global_pose.s - kBehindWindow);
    const double window_hi = std::min(total_length, global_pose.s + kAheadWindow);
    const int sample_count =
        std::max(3, static_cast<int>(std::ceil((window_hi - window_lo) / kPathSampleStep)) + 1);
    std::vector<double> sample_global(sample_count);
    std::vector<Vec2> sample_points(sample_count);
    for (int i = 0; i < sample_count; ++i) {
      sample_global[i] =
          window_lo + (window_hi - window_lo) * i / static_cast<double>(sample_count - 1);
      sample_points[i] = global_path.position(sample_global[i]);
    }
    auto local_path = std::make_shared<const PathSpline2D>(PathSpline2D::fit(sample_points));
    std::vector<double> sample_local(sample_count);
    for (int i = 0; i < sample_count; ++i) {
      sample_local[i] =
          local_path->project(sample_points[i], global_path.heading(sample_global[i])).s;
    }
    const BoundarySpline1D local_right = local_boundary(sample_local, sample_global, global_right);
    const BoundarySpline1D local_left = local_boundary(sample_local, sample_global, global_left);

    const FrenetPose local_pose = local_path->project({truth.x, truth.y}, truth.theta);
    const EgoState x0{local_pose.s, local_pose.d, local_pose.heading_diff, truth.kappa, truth.v};

    // Obstacle snapshots: only bodies whose prediction can reach the window
    // are handed to the projector, so far-away traffic cannot alias onto the
    // clamped window ends.
    std::vector<ProtrusionSet> protrusions;
    for (const ObstacleTruth& obstacle : obstacles) {
      double anchor_s;
      try {
        anchor_s = global_path.project({obstacle.anchor.x, obstacle.anchor.y},
                                       obstacle.anchor.theta).s;
      } catch (const NoProjection&) {
        continue;
      }
      const double travel = std::max(0.0, obstacle.anchor.v) * scenario.horizon.horizon +
                            0.5 * std::abs(obstacle.model.accel) * scenario.horizon.horizon *
                                scenario.horizon.horizon;
      const double reach = obstacle.body_radius + obstacle.safety_margin + 5.0;
      if (anchor_s + travel + reach < window_lo || anchor_s - reach > window_hi) continue;
      Obstacle snapshot;
      snapshot.footprint = obstacle.corners();
      snapshot.heading = obstacle.anchor.theta;
      snapshot.safety_margin = obstacle.safety_margin;
      snapshot.motion = obstacle.model;
      snapshot.motion.speed = std::max(0.0, obstacle.anchor.v);
      try {
        protrusions.push_back(project_obstacle(snapshot, *local_path, local_right, local_left, dt,
                                               scenario.horizon.steps));
      } catch (const NoProjection&) {
        continue;
      }
    }

    const Corridor corridor = build_corridor(
        protrusions, local_path, local_right, local_left, scenario.ego, scenario.road_speed,
        scenario.control_bounds, scenario.lateral_accel_limit, scenario.horizon.steps,
        corridor_config);

    PlanRecord record;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      record = planner.plan_step(options.variant, x0, corridor,
                                 previous ? &*previous : nullptr);
    } catch (const TickFailure& failure) {
      result.outcome = Outcome::Failed;
      char detail[160];
      std::snprintf(detail, sizeof(detail),
                    "no safe plan (residuals: progress %.3g, lateral %.3g, velocity %.3g, "
                    "lat_accel %.3g, control %.3g)",
                    failure.residuals[0], failure.residuals[1], failure.residuals[2],
                    failure.residuals[3], failure.residuals[4]);
      result.reason = detail;
      result.failure_location = global_state;
      return finalize();
    }
    const auto t1 = std::chrono::steady_clock::now();
    const double wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    wall_total += wall_ms;
    result.max_solve_ms = std::max(result.max_solve_ms, wall_ms);

    // Corridor cross-sections at both homotopy endpoints, every snapshot_step
    // of local arc length.
    if (options.snapshot_step > 0.0) {
      for (double s = 0.0; s <= corridor.length() + 1e-9; s += options.snapshot_step) {
        SnapshotRow row;
        row.tick = tick;
        row.s_global = window_lo + s;
        row.d_lo_base = corridor.d_lo(s, 0, 0.0);
        row.d_hi_base = corridor.d_hi(s, 0, 0.0);
        row.d_lo_full = corridor.d_lo(s, 0, 1.0);
        row.d_hi_full = corridor.d_hi(s, 0, 1.0);
        row.v_cap = corridor.v_hi(s, 1.0);
        result.snapshots.push_back(row);
      }
    }

    const EgoControl applied = record.controls.front();
    TraceRow row;
    row.tick = tick;
    row.time = tick * dt;
    row.applied = applied;
    row.position = {truth.x, truth.y};
    row.heading = truth.theta;
    row.frenet = global_state;
    row.status = record.status;
    row.zeta = record.zeta_reached;
    row.iterations = record.iterations;
    row.solves = record.solves;
    row.wall_ms = wall_ms;
    row.residuals = record.max_residuals;
    result.trace.push_back(row);

    std::vector<Vec2> plan_path;
    plan_path.reserve(record.cartesian.size());
    for (const CartesianNode& node : record.cartesian) plan_path.push_back(node.position);
    result.plan_paths.push_back(std::move(plan_path));

    // A blockade halt needs a sustained standstill while the corridor is
    // actually sealed; transient slow ticks reset the streak.
    if (corridor.blockade().blocked && truth.v < kHaltSpeed) {
      if (++halt_streak >= kHaltTicks) {
        result.outcome = Outcome::HaltedAtBlockade;
        result.reason = "standstill at blockade";
        return finalize();
      }
    } else {
      halt_streak = 0;
    }

    truth = rk4_step(truth, [&](const TruthState& t) { return truth_derivative(t, applied); }, dt);
    truth.v = std::max(truth.v, 0.0);
    result.min_speed = std::min(result.min_speed, truth.v);

    for (ObstacleTruth& obstacle : obstacles) {
      obstacle.anchor = predict_anchor(obstacle.model, obstacle.anchor, dt, 1).back();
    }
    previous = std::move(record);
  }

  result.outcome = Outcome::Failed;
  result.reason = "tick budget exhausted";
  result.failure_location = {result.final_progress, 0.0, 0.0, truth.kappa, truth.v};
  return finalize();
}

}  // namespace planner
