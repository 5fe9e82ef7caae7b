// Micro-benchmarks for the hot per-tick stages: obstacle projection, boundary
// augmentation, and a full planning tick on a representative corridor.

#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <vector>

#include "planner/corridor.hpp"
#include "planner/mpc.hpp"
#include "planner/projection.hpp"
#include "planner/spline.hpp"

using namespace planner;

namespace {

std::shared_ptr<const PathSpline2D> straight_path(double length) {
  std::vector<Vec2> points;
  for (double x = 0.0; x <= length + 1e-9; x += 5.0) points.push_back({x, 0.0});
  return std::make_shared<const PathSpline2D>(PathSpline2D::fit(points));
}

BoundarySpline1D constant_boundary(double length, double offset) {
  return BoundarySpline1D({0.0, length}, {offset, offset});
}

Obstacle octagon_obstacle() {
  Obstacle obstacle;
  for (int i = 0; i < 8; ++i) {
    const double a = 2.0 * M_PI * i / 8.0;
    obstacle.footprint.push_back({40.0 + 1.2 * std::cos(a), -1.5 + 1.2 * std::sin(a)});
  }
  obstacle.safety_margin = 0.2;
  obstacle.motion.kind = ObstacleMotionModel::Kind::ConstantVelocity;
  obstacle.motion.speed = 3.0;
  return obstacle;
}

Obstacle box_obstacle(double cx, double cy, double hx, double hy, double margin) {
  Obstacle obstacle;
  obstacle.footprint = {{cx - hx, cy - hy}, {cx + hx, cy - hy}, {cx + hx, cy + hy},
                        {cx - hx, cy + hy}};
  obstacle.safety_margin = margin;
  return obstacle;
}

void bench_projection(benchmark::State& state) {
  const auto path = straight_path(100.0);
  const BoundarySpline1D right = constant_boundary(100.0, -2.5);
  const BoundarySpline1D left = constant_boundary(100.0, 2.5);
  const Obstacle obstacle = octagon_obstacle();
  const double dt = 3.5 / 30.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(project_obstacle(obstacle, *path, right, left, dt, 30));
  }
}
BENCHMARK(bench_projection)->Unit(benchmark::kMicrosecond);

void bench_augmentation(benchmark::State& state) {
  const auto path = straight_path(100.0);
  const BoundarySpline1D right = constant_boundary(100.0, -2.5);
  const BoundarySpline1D left = constant_boundary(100.0, 2.5);
  const double dt = 3.5 / 30.0;
  std::vector<ProtrusionSet> protrusions;
  protrusions.push_back(project_obstacle(octagon_obstacle(), *path, right, left, dt, 30));
  protrusions.push_back(
      project_obstacle(box_obstacle(70.0, 1.4, 1.5, 0.8, 0.2), *path, right, left, dt, 30));
  const EgoGeometry ego;
  const CorridorConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(augment_boundaries(protrusions, right, left, ego, 30, config));
  }
}
BENCHMARK(bench_augmentation)->Unit(benchmark::kMicrosecond);

void bench_tick(benchmark::State& state) {
  const auto path = straight_path(100.0);
  const BoundarySpline1D right = constant_boundary(100.0, -2.5);
  const BoundarySpline1D left = constant_boundary(100.0, 2.5);
  const double dt = 0.14;
  std::vector<ProtrusionSet> protrusions;
  protrusions.push_back(
      project_obstacle(box_obstacle(31.0, -1.4, 1.0, 0.6, 0.2), *path, right, left, dt, 25));
  CorridorConfig config;
  config.homotopy_stages = 5;
  const Corridor corridor = build_corridor(protrusions, path, right, left, EgoGeometry{}, 8.0,
                                           ControlBounds{}, 2.0, 25, config);
  PlannerSettings settings;
  Planner planner(settings);
  EgoState x0;
  x0.s = 4.0;
  x0.v = 7.5;
  PlanRecord previous = planner.plan_step(Variant::Homotopy, x0, corridor, nullptr);
  for (auto _ : state) {
    benchmark::DoNotOptimize(planner.plan_step(Variant::Homotopy, x0, corridor, &previous));
  }
}
BENCHMARK(bench_tick)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
