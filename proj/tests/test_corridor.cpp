#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "planner/corridor.hpp"
#include "test_support.hpp"

using planner::BlockadeInfo;
using planner::BoundarySpline1D;
using planner::Corridor;
using planner::CorridorConfig;
using planner::EgoGeometry;
using planner::ProtrusionSet;
using planner::SpeedProfile;
using planner::Vec2;

namespace {

// A protrusion held fixed over every prediction step, straight from a vertex
// loop in road coordinates.
ProtrusionSet static_protrusion(const std::vector<Vec2>& polygon, int eta, int steps,
                                double margin = 0.0) {
  ProtrusionSet set;
  set.eta = eta;
  set.safety_margin = margin;
  set.polygons.assign(static_cast<std::size_t>(steps) + 1, polygon);
  set.anchors.assign(static_cast<std::size_t>(steps) + 1, planner::AnchorPose{});
  return set;
}

// Wedge rising from the right lane edge at s = 20 to d = +2 at s = 24. Its
// inflated contour crosses the reference line at s = 22 and seals a +/- 2
// lane shortly before 24, which makes every blockade quantity predictable.
Corridor wedge_corridor(const testbed::CorridorFixture& fx) {
  const std::vector<Vec2> wedge = {{20.0, -2.0}, {24.0, -2.0}, {24.0, 2.0}};
  const std::vector<ProtrusionSet> protrusions = {static_protrusion(wedge, -1, fx.steps)};
  return planner::build_corridor(protrusions, fx.path, testbed::constant_boundary(60.0, -2.0),
                                 testbed::constant_boundary(60.0, 2.0), fx.ego, fx.road_speed,
                                 fx.bounds, fx.lateral_accel_limit, fx.steps, fx.config);
}

testbed::CorridorFixture thin_ego_fixture() {
  testbed::CorridorFixture fx;
  fx.path = testbed::straight_path(60.0);
  // A near-point vehicle keeps the inflated contour on top of the raw one.
  fx.ego = EgoGeometry{0.002, 0.001, 0.001};
  return fx;
}

}  // namespace

TEST_CASE("augmentation lifts only the obstacle's own side") {
  testbed::CorridorFixture fx;
  fx.path = testbed::straight_path(100.0);
  const Corridor corridor =
      testbed::make_corridor(fx, 100.0, 2.0, {testbed::box_obstacle(31.0, -1.4, 1.0, 0.6, 0.2)});

  for (int k = 0; k <= fx.steps; ++k) {
    CHECK(corridor.bumps().left[static_cast<std::size_t>(k)].empty());
    CHECK_FALSE(corridor.bumps().right[static_cast<std::size_t>(k)].empty());
  }
  // Box top at -0.8 plus margin 0.2 plus half of the 1.8 m body: the lower
  // bound at the deepest point must reach +0.3.
  CHECK(corridor.d_lo(31.0, 0, 1.0) == doctest::Approx(0.3).epsilon(1e-6));
  // Far away the base lane is untouched.
  CHECK(corridor.d_lo(80.0, 0, 1.0) == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(corridor.d_hi(31.0, 0, 1.0) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("bump support covers the body sweep and the onset ramps") {
  testbed::CorridorFixture fx;
  fx.path = testbed::straight_path(100.0);
  const Corridor corridor =
      testbed::make_corridor(fx, 100.0, 2.0, {testbed::box_obstacle(31.0, -1.4, 1.0, 0.6, 0.2)});
  // Body dilation stretches the box [30, 32] to [30 - l_f, 32 + l_b]; the
  // ramps add another ramp_length on each side. Outside that the boundary
  // must stay base.
  const double lo = 30.0 - fx.ego.front_length - fx.config.ramp_length;
  const double hi = 32.0 + fx.ego.back_length + fx.config.ramp_length;
  CHECK(corridor.d_lo(lo - 0.2, 0, 1.0) == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(corridor.d_lo(hi + 0.2, 0, 1.0) == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(corridor.d_lo(lo + 0.8, 0, 1.0) > -2.0 + 1e-6);
  CHECK(corridor.d_lo(hi - 0.8, 0, 1.0) > -2.0 + 1e-6);
}

TEST_CASE("proximate same-side contours merge, distant ones stay separate") {
  testbed::CorridorFixture fx;
  fx.path = testbed::straight_path(100.0);
  const Corridor merged = testbed::make_corridor(
      fx, 100.0, 2.0,
      {testbed::box_obstacle(11.0, -1.5, 1.0, 0.5), testbed::box_obstacle(16.0, -1.5, 1.0, 0.5)});
  CHECK(merged.bumps().right[0].size() == 1);

  const Corridor separate = testbed::make_corridor(
      fx, 100.0, 2.0,
      {testbed::box_obstacle(11.0, -1.5, 1.0, 0.5), testbed::box_obstacle(41.0, -1.5, 1.0, 0.5)});
  CHECK(separate.bumps().right[0].size() == 2);
  // The merged composite must dominate both members everywhere between them.
  for (double s = 9.0; s <= 18.0; s += 0.3) {
    CHECK(merged.d_lo(s, 0, 1.0) >= separate.d_lo(s, 0, 1.0) - 1e-9);
  }
}

TEST_CASE("blend endpoints hit the base and augmented boundaries exactly") {
  testbed::CorridorFixture fx;
  fx.path = testbed::straight_path(100.0);
  const Corridor corridor =
      testbed::make_corridor(fx, 100.0, 2.0, {testbed::box_obstacle(31.0, -1.4, 1.0, 0.6, 0.2)});
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> s_pick(0.0, 100.0);
  std::uniform_int_distribution<int> k_pick(0, fx.steps);
  for (int i = 0; i < 1000; ++i) {
    const double s = s_pick(rng);
    const int k = k_pick(rng);
    CHECK(std::abs(corridor.d_lo(s, k, 0.0) - corridor.base_right().value(s)) <= 1e-12);
    CHECK(std::abs(corridor.d_hi(s, k, 0.0) - corridor.base_left().value(s)) <= 1e-12);
    double bump = 0.0;
    for (const planner::PiecewiseLinear& b : corridor.bumps().right[static_cast<std::size_t>(k)]) {
      bump = std::max(bump, b(s));
    }
    CHECK(std::abs(corridor.d_lo(s, k, 1.0) - (corridor.base_right().value(s) + bump)) <= 1e-12);
    // The blend is affine in zeta, so the midpoint is the exact average.
    const double mid = 0.5 * (corridor.d_lo(s, k, 0.0) + corridor.d_lo(s, k, 1.0));
    CHECK(std::abs(corridor.d_lo(s, k, 0.5) - mid) <= 1e-12);
  }
}

TEST_CASE("relaxation is monotone and augmentation only shrinks") {
  testbed::CorridorFixture fx;
  fx.path = testbed::straight_path(100.0);
  const Corridor corridor = testbed::make_corridor(
      fx, 100.0, 2.0,
      {testbed::box_obstacle(31.0, -1.4, 1.0, 0.6, 0.2), testbed::box_obstacle(50.0, 1.3, 1.0, 0.7)});
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> s_pick(0.0, 100.0);
  std::uniform_int_distribution<int> k_pick(0, fx.steps);
  for (int i = 0; i < 400; ++i) {
    const double s = s_pick(rng);
    const int k = k_pick(rng);
    double previous_lo = corridor.d_lo(s, k, 0.0);
    double previous_hi = corridor.d_hi(s, k, 0.0);
    CHECK(previous_lo >= corridor.base_right().value(s) - 1e-9);
    CHECK(previous_hi <= corridor.base_left().value(s) + 1e-9);
    for (double zeta = 0.1; zeta <= 1.0 + 1e-9; zeta += 0.1) {
      const double lo = corridor.d_lo(s, k, zeta);
      const double hi = corridor.d_hi(s, k, zeta);
      CHECK(lo >= previous_lo - 1e-12);
      CHECK(hi <= previous_hi + 1e-12);
      previous_lo = lo;
      previous_hi = hi;
    }
  }
}

TEST_CASE("the homotopy schedule is linear from zero to one") {
  testbed::CorridorFixture fx;
  fx.path = testbed::straight_path(60.0);
  const Corridor corridor = testbed::open_corridor(fx, 60.0, 2.0);
  const std::vector<double>& schedule = corridor.homotopy_schedule();
  REQUIRE(schedule.size() == 20);
  CHECK(schedule.front() == 0.0);
  CHECK(schedule.back() == 1.0);
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    CHECK(std::abs(schedule[i] - static_cast<double>(i) / 19.0) <= 1e-15);
    if (i > 0) CHECK(schedule[i] > schedule[i - 1]);
  }

  testbed::CorridorFixture single = fx;
  single.config.homotopy_stages = 1;
  const Corridor collapsed = testbed::open_corridor(single, 60.0, 2.0);
  REQUIRE(collapsed.homotopy_schedule().size() == 1);
  CHECK(collapsed.homotopy_schedule().front() == 1.0);
}

TEST_CASE("an open corridor reports no blockade and a free speed cap") {
  testbed::CorridorFixture fx;
  fx.path = testbed::straight_path(60.0);
  const Corridor corridor = testbed::open_corridor(fx, 60.0, 2.0);
  CHECK_FALSE(corridor.blockade().blocked);
  CHECK(corridor.s_stop() == doctest::Approx(corridor.length()));
  // Wherever no blockade is declared the corridor keeps a usable width.
  for (double s = 0.0; s <= 60.0; s += 0.5) {
    for (int k = 0; k <= fx.steps; k += 5) {
      CHECK(corridor.d_hi(s, k, 1.0) >= corridor.d_lo(s, k, 1.0) - fx.config.omega_min);
    }
  }
}

TEST_CASE("blockade detection matches a dense width scan") {
  const testbed::CorridorFixture fx = thin_ego_fixture();
  const Corridor corridor = wedge_corridor(fx);
  REQUIRE(corridor.blockade().blocked);
  CHECK(corridor.blockade().k_h == 0);

  double dense_s = -1.0;
  for (double s = 0.0; s <= corridor.length() && dense_s < 0.0; s += 0.005) {
    for (int k = 0; k <= fx.steps; ++k) {
      if (corridor.tunnel_width(s, k) <= fx.config.omega_min) {
        dense_s = s;
        break;
      }
    }
  }
  REQUIRE(dense_s >= 0.0);
  CHECK(std::abs(corridor.blockade().s_h - dense_s) <= 0.05);
  // The wedge seals a 4 m lane at width <= omega_min just before s = 24.
  CHECK(corridor.blockade().s_h == doctest::Approx(23.95).epsilon(0.01));
}

TEST_CASE("the anticipatory stop backtracks to the reference-line crossing") {
  const testbed::CorridorFixture fx = thin_ego_fixture();
  const Corridor corridor = wedge_corridor(fx);
  const double stop = corridor.s_stop();
  CHECK(stop < corridor.blockade().s_h);
  // The wedge boundary crosses d = 0 at s = 22 by construction.
  CHECK(stop == doctest::Approx(22.0).epsilon(0.005));
  CHECK(corridor.d_lo(stop, 0, 1.0) <= fx.config.stop_return_tolerance + 1e-9);
}

TEST_CASE("speed profile junctions are continuous and match braking kinematics") {
  planner::ControlBounds bounds;
  bounds.u2_min = -2.0;  // 2 m/s^2 braking makes the reference numbers round

  SUBCASE("the stop is far enough for a full-speed plateau") {
    const SpeedProfile p = planner::build_speed_profile(50.0, 10.0, bounds);
    const oracle::BrakingPlateau expected = oracle::braking_plateau(50.0, 10.0, 2.0);
    CHECK(p.v0 == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(p.s_decl == doctest::Approx(25.0).epsilon(1e-12));
    CHECK(p.v0 == doctest::Approx(expected.v0).epsilon(1e-12));
    CHECK(p.s_decl == doctest::Approx(expected.s_decl).epsilon(1e-12));
    CHECK(std::abs(p.cap(p.s_decl) - p.v0) <= 1e-9);
    CHECK(std::abs(p.cap(p.s_stop)) <= 1e-9);
    CHECK(p.cap(0.0) == doctest::Approx(p.v0));
    CHECK(p.cap(p.s_stop + 5.0) == doctest::Approx(0.0));
  }

  SUBCASE("a close stop lowers the plateau below the road speed") {
    const SpeedProfile p = planner::build_speed_profile(16.0, 10.0, bounds);
    const oracle::BrakingPlateau expected = oracle::braking_plateau(16.0, 10.0, 2.0);
    CHECK(expected.s_decl == doctest::Approx(0.0));
    CHECK(p.v0 == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(p.v0 == doctest::Approx(expected.v0).epsilon(1e-12));
    CHECK(p.s_decl == doctest::Approx(0.0));
    CHECK(std::abs(p.cap(p.s_stop)) <= 1e-9);
  }

  SUBCASE("the linear ramp never exceeds the physical braking curve") {
    const SpeedProfile p = planner::build_speed_profile(50.0, 10.0, bounds);
    for (double s = p.s_decl; s <= p.s_stop; s += 0.1) {
      const double physical = std::sqrt(2.0 * 2.0 * (p.s_stop - s));
      CHECK(p.cap(s) <= physical + 1e-9);
    }
  }

  SUBCASE("a vanished braking limit is rejected") {
    planner::ControlBounds broken = bounds;
    broken.u2_min = 0.0;
    CHECK_THROWS_AS((void)planner::build_speed_profile(20.0, 10.0, broken),
                    std::invalid_argument);
  }
}

TEST_CASE("speed blending interpolates between road speed and the stop cap") {
  const testbed::CorridorFixture fx = thin_ego_fixture();
  const Corridor corridor = wedge_corridor(fx);
  for (double s = 0.0; s <= 30.0; s += 1.3) {
    CHECK(corridor.v_hi(s, 0.0) == doctest::Approx(fx.road_speed).epsilon(1e-12));
    CHECK(corridor.v_hi(s, 1.0) ==
          doctest::Approx(corridor.speed_profile().cap(s)).epsilon(1e-12));
  }
  // Past the stop the cap is zero, so the half-blend is half the road speed.
  CHECK(corridor.v_hi(corridor.s_stop() + 3.0, 0.5) ==
        doctest::Approx(fx.road_speed / 2.0).epsilon(1e-12));
}

TEST_CASE("corridor evaluation bundles the same numbers as the accessors") {
  testbed::CorridorFixture fx;
  fx.path = testbed::straight_path(100.0);
  const Corridor corridor =
      testbed::make_corridor(fx, 100.0, 2.0, {testbed::box_obstacle(31.0, -1.4, 1.0, 0.6, 0.2)});
  const planner::ConstraintEvaluation e = planner::evaluate_corridor(corridor, 31.0, 3, 0.7);
  CHECK(e.d_lo == doctest::Approx(corridor.d_lo(31.0, 3, 0.7)));
  CHECK(e.d_hi == doctest::Approx(corridor.d_hi(31.0, 3, 0.7)));
  CHECK(e.v_hi == doctest::Approx(corridor.v_hi(31.0, 0.7)));
  CHECK(e.s_stop == doctest::Approx(corridor.s_stop()));
  CHECK(e.lateral_accel_limit == doctest::Approx(corridor.lateral_accel_limit()));
}

TEST_CASE("mismatched protrusion step counts are rejected") {
  const testbed::CorridorFixture fx = thin_ego_fixture();
  ProtrusionSet bad = static_protrusion({{10.0, -2.5}, {12.0, -2.5}, {12.0, -1.0}}, -1, 5);
  const std::vector<ProtrusionSet> protrusions = {bad};
  CHECK_THROWS_AS((void)planner::augment_boundaries(protrusions,
                                                    testbed::constant_boundary(60.0, -2.0),
                                                    testbed::constant_boundary(60.0, 2.0), fx.ego,
                                                    fx.steps, fx.config),
                  std::invalid_argument);
}
