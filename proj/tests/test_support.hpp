#pragma once

// Shared fixtures for the test binaries: canonical straight-road corridors
// and small geometry builders. The scenario directory is injected by the
// build so tests can run from any working directory.

#include <memory>
#include <string>
#include <vector>

#include "planner/corridor.hpp"
#include "planner/projection.hpp"
#include "planner/spline.hpp"

#ifndef TEST_SCENARIO_DIR
#define TEST_SCENARIO_DIR "."
#endif

namespace testbed {

inline std::string scenario_path(const std::string& name) {
  return std::string(TEST_SCENARIO_DIR) + "/" + name;
}

inline std::shared_ptr<const planner::PathSpline2D> straight_path(double length,
                                                                  double step = 5.0) {
  std::vector<planner::Vec2> points;
  for (double x = 0.0; x <= length + 1e-9; x += step) points.push_back({x, 0.0});
  return std::make_shared<const planner::PathSpline2D>(planner::PathSpline2D::fit(points));
}

inline planner::BoundarySpline1D constant_boundary(double length, double offset) {
  return planner::BoundarySpline1D({0.0, length}, {offset, offset});
}

inline planner::Obstacle box_obstacle(double cx, double cy, double half_x, double half_y,
                                      double margin = 0.0) {
  planner::Obstacle o;
  o.footprint = {{cx - half_x, cy - half_y},
                 {cx + half_x, cy - half_y},
                 {cx + half_x, cy + half_y},
                 {cx - half_x, cy + half_y}};
  o.safety_margin = margin;
  return o;
}

struct CorridorFixture {
  std::shared_ptr<const planner::PathSpline2D> path;
  planner::EgoGeometry ego;
  planner::ControlBounds bounds;
  double road_speed = 8.0;
  double lateral_accel_limit = 2.0;
  int steps = 25;
  planner::CorridorConfig config;
};

// Straight road with a +/- half_width lane and the given obstacles projected
// onto it. dt matches the default horizon (3.5 s over 25 steps).
inline planner::Corridor make_corridor(const CorridorFixture& fx, double length, double half_width,
                                       const std::vector<planner::Obstacle>& obstacles,
                                       double dt = 0.14) {
  const planner::BoundarySpline1D right = constant_boundary(length, -half_width);
  const planner::BoundarySpline1D left = constant_boundary(length, half_width);
  std::vector<planner::ProtrusionSet> protrusions;
  for (const planner::Obstacle& o : obstacles) {
    protrusions.push_back(planner::project_obstacle(o, *fx.path, right, left, dt, fx.steps));
  }
  return planner::build_corridor(protrusions, fx.path, right, left, fx.ego, fx.road_speed,
                                 fx.bounds, fx.lateral_accel_limit, fx.steps, fx.config);
}

inline planner::Corridor open_corridor(const CorridorFixture& fx, double length,
                                       double half_width) {
  return make_corridor(fx, length, half_width, {});
}

}  // namespace testbed
