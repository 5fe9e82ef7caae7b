#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "planner/mpc.hpp"
#include "test_support.hpp"

using planner::ConstraintFamily;
using planner::Corridor;
using planner::EgoControl;
using planner::EgoState;
using planner::PlanRecord;
using planner::Planner;
using planner::PlannerSettings;
using planner::PlanStatus;
using planner::SafetyTolerances;
using planner::TickFailure;
using planner::Variant;

namespace {

EgoState cruising_start() {
  EgoState x;
  x.s = 4.0;
  x.v = 7.5;
  return x;
}

// Safety predicate written from scratch against the corridor accessors: the
// plan must keep arc length non-decreasing (within solver round-off) and obey
// the hard fully-augmented constraints within the per-family tolerances. The
// pure state rows of node zero describe the measurement, not the plan, so
// they are exempt; node-zero controls are not.
bool reference_safe(const std::vector<EgoState>& states, const std::vector<EgoControl>& controls,
                    const Corridor& corridor, const SafetyTolerances& tol) {
  if (states.empty() || states.size() != controls.size()) return false;
  for (std::size_t k = 0; k + 1 < states.size(); ++k) {
    if (states[k + 1].s < states[k].s - 1e-7) return false;
  }
  const planner::ControlBounds& bounds = corridor.control_bounds();
  for (std::size_t k = 0; k < states.size(); ++k) {
    const EgoState& x = states[k];
    const EgoControl& u = controls[k];
    if (k > 0) {
      if (x.s - corridor.s_stop() > tol.progress) return false;
      const int node = static_cast<int>(k);
      if (corridor.d_lo(x.s, node, 1.0) - x.d > tol.lateral) return false;
      if (x.d - corridor.d_hi(x.s, node, 1.0) > tol.lateral) return false;
      if (-x.v > tol.velocity) return false;
      if (x.v - corridor.v_hi(x.s, 1.0) > tol.velocity) return false;
      const double an = x.kappa * x.v * x.v;
      if (std::abs(an) - corridor.lateral_accel_limit() > tol.lateral_accel) return false;
    }
    if (bounds.u1_min - u.u1 > tol.control) return false;
    if (u.u1 - bounds.u1_max > tol.control) return false;
    if (bounds.u2_min - u.u2 > tol.control) return false;
    if (u.u2 - bounds.u2_max > tol.control) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("status and variant names are stable") {
  CHECK(std::string(planner::to_string(Variant::Mpc)) == "mpc");
  CHECK(std::string(planner::to_string(Variant::Recover)) == "re");
  CHECK(std::string(planner::to_string(Variant::Homotopy)) == "hb");
  CHECK(std::string(planner::to_string(Variant::SensitivityUpdate)) == "su");
  CHECK(std::string(planner::to_string(Variant::StopSafe)) == "ss");
  CHECK(std::string(planner::to_string(PlanStatus::Optimal)) == "optimal");
  CHECK(std::string(planner::to_string(PlanStatus::HomotopyPartial)) == "homotopy-partial");
  CHECK(std::string(planner::to_string(PlanStatus::SensitivityShifted)) == "sensitivity-shifted");
  CHECK(std::string(planner::to_string(PlanStatus::StopFallback)) == "stop-fallback");
  CHECK(std::string(planner::to_string(PlanStatus::Recovered)) == "recovered");
}

TEST_CASE("a benign tick yields an accepted optimal plan") {
  testbed::CorridorFixture fx;
  fx.path = testbed::straight_path(100.0);
  const Corridor corridor = testbed::open_corridor(fx, 100.0, 2.5);
  Planner planner{PlannerSettings{}};
  const EgoState x0 = cruising_start();

  const PlanRecord plan = planner.plan_step(Variant::Mpc, x0, corridor, nullptr);
  CHECK(plan.status == PlanStatus::Optimal);
  CHECK(plan.zeta_reached == 1.0);
  CHECK(plan.solves == 1);
  CHECK(plan.iterations > 0);
  REQUIRE(plan.states.size() == 26);
  REQUIRE(plan.controls.size() == 26);
  REQUIRE(plan.cartesian.size() == 26);
  REQUIRE(plan.step_transitions.size() == 25);
  CHECK(plan.dt == doctest::Approx(0.14));
  CHECK(plan.states[0].s == doctest::Approx(x0.s).epsilon(1e-9));
  CHECK(plan.states[0].v == doctest::Approx(x0.v).epsilon(1e-9));
  CHECK(plan.states[25].s > x0.s + 10.0);
  CHECK(planner::is_safe(plan.states, plan.controls, corridor, planner.settings().tolerances));
  for (int family = 0; family < planner::kConstraintFamilies; ++family) {
    const auto f = static_cast<ConstraintFamily>(family);
    CHECK(plan.max_residuals[static_cast<std::size_t>(family)] <=
          planner.settings().tolerances.of(f));
  }
}

TEST_CASE("safety fuzzing agrees with an independent predicate") {
  testbed::CorridorFixture fx;
  fx.path = testbed::straight_path(100.0);
  const Corridor corridor =
      testbed::make_corridor(fx, 100.0, 2.5, {testbed::box_obstacle(31.0, -1.4, 1.0, 0.6, 0.2)});
  Planner planner{PlannerSettings{}};
  const SafetyTolerances tol = planner.settings().tolerances;
  const PlanRecord base = planner.plan_step(Variant::Homotopy, cruising_start(), corridor, nullptr);
  REQUIRE(planner::is_safe(base.states, base.controls, corridor, tol));

  std::mt19937 rng(20240815);
  std::uniform_int_distribution<int> kind_pick(0, 5);
  std::uniform_int_distribution<std::size_t> node_pick(1, base.states.size() - 1);
  std::uniform_real_distribution<double> extra(0.01, 1.0);

  std::array<int, 6> seen{};
  std::array<int, 6> rejected{};
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<EgoState> states = base.states;
    std::vector<EgoControl> controls = base.controls;
    const int kind = kind_pick(rng);
    const std::size_t k = node_pick(rng);
    switch (kind) {
      case 0:  // arc length steps backward
        states[k].s = states[k - 1].s - 1e-6 - extra(rng);
        break;
      case 1:  // beyond the upper lateral bound plus tolerance
        states[k].d = corridor.d_hi(states[k].s, static_cast<int>(k), 1.0) + tol.lateral + 0.01 +
                      extra(rng);
        break;
      case 2:  // beyond the speed cap plus tolerance
        states[k].v = corridor.v_hi(states[k].s, 1.0) + tol.velocity + 0.01 + extra(rng);
        break;
      case 3:  // steering rate outside its box
        controls[k].u1 = corridor.control_bounds().u1_max + 0.01 + extra(rng);
        break;
      case 4:  // lateral acceleration beyond the comfort band
        states[k].v = std::max(states[k].v, 1.0);
        states[k].kappa = (corridor.lateral_accel_limit() + tol.lateral_accel + 0.01 + extra(rng)) /
                          (states[k].v * states[k].v);
        break;
      default:  // untouched copy stays accepted
        break;
    }
    const bool lib = planner::is_safe(states, controls, corridor, tol);
    const bool ref = reference_safe(states, controls, corridor, tol);
    CHECK(lib == ref);
    if (lib != ref) break;  // one detailed failure is enough
    ++seen[static_cast<std::size_t>(kind)];
    if (!lib) ++rejected[static_cast<std::size_t>(kind)];
  }
  for (int kind = 0; kind < 5; ++kind) {
    CHECK(seen[static_cast<std::size_t>(kind)] > 0);
    // Every corrupted copy must have been rejected.
    CHECK(rejected[static_cast<std::size_t>(kind)] == seen[static_cast<std::size_t>(kind)]);
  }
  CHECK(rejected[5] == 0);
}

TEST_CASE("safety rejects mismatched or empty trajectories") {
  testbed::CorridorFixture fx;
  fx.path = testbed::straight_path(60.0);
  const Corridor corridor = testbed::open_corridor(fx, 60.0, 2.5);
  const SafetyTolerances tol;
  CHECK_FALSE(planner::is_safe({}, {}, corridor, tol));
  CHECK_FALSE(planner::is_safe(std::vector<EgoState>(3), std::vector<EgoControl>(2), corridor,
                               tol));
}

TEST_CASE("recovery clamps the controls and re-propagates the states") {
  testbed::CorridorFixture fx;
  fx.path = testbed::straight_path(100.0);
  const Corridor corridor = testbed::open_corridor(fx, 100.0, 2.5);
  const double dt = 0.14;

  std::vector<EgoState> states(10);
  std::vector<EgoControl> controls(10);
  for (std::size_t k = 0; k < 10; ++k) {
    states[k] = {1000.0 + 7.0 * static_cast<double>(k), 5.0, 1.0, 0.3, 99.0};
    controls[k] = {k % 2 == 0 ? 0.9 : -0.9, k % 3 == 0 ? 7.0 : -11.0};
  }
  const EgoState x0 = cruising_start();
  planner::recover(states, controls, x0, corridor, dt);

  CHECK(states[0].s == x0.s);
  CHECK(states[0].v == x0.v);
  for (const EgoControl& u : controls) {
    CHECK(u.u1 >= corridor.control_bounds().u1_min);
    CHECK(u.u1 <= corridor.control_bounds().u1_max);
    CHECK(u.u2 >= corridor.control_bounds().u2_min);
    CHECK(u.u2 <= corridor.control_bounds().u2_max);
  }
  CHECK(controls[0].u1 == doctest::Approx(0.5));
  CHECK(controls[0].u2 == doctest::Approx(2.0));
  CHECK(controls[1].u1 == doctest::Approx(-0.5));
  CHECK(controls[1].u2 == doctest::Approx(-4.0));
  for (std::size_t k = 0; k + 1 < states.size(); ++k) {
    const EgoState expected = planner::rk4_ego(states[k], controls[k], corridor.path(), dt);
    CHECK(std::abs(states[k + 1].s - expected.s) <= 1e-12);
    CHECK(std::abs(states[k + 1].d - expected.d) <= 1e-12);
    CHECK(std::abs(states[k + 1].chi - expected.chi) <= 1e-12);
    CHECK(std::abs(states[k + 1].kappa - expected.kappa) <= 1e-12);
    CHECK(std::abs(states[k + 1].v - expected.v) <= 1e-12);
  }

  std::vector<EgoState> broken(3);
  std::vector<EgoControl> few(2);
  CHECK_THROWS_AS(planner::recover(broken, few, x0, corridor, dt), std::invalid_argument);
}

TEST_CASE("the validity gate measures deviation from the prediction") {
  testbed::CorridorFixture fx;
  fx.path = testbed::straight_path(100.0);
  const Corridor corridor = testbed::open_corridor(fx, 100.0, 2.5);
  Planner planner{PlannerSettings{}};
  const PlanRecord plan = planner.plan_step(Variant::Mpc, cruising_start(), corridor, nullptr);
  const planner::ValidityThresholds thresholds;

  CHECK_FALSE(planner::is_valid(plan.states[1], nullptr, corridor.path(), thresholds, 1));
  CHECK(planner::is_valid(plan.states[1], &plan, corridor.path(), thresholds, 1));

  EgoState off = plan.states[1];
  off.d += 0.3;  // 0.3 m past the 0.2 m position threshold
  CHECK_FALSE(planner::is_valid(off, &plan, corridor.path(), thresholds, 1));

  off = plan.states[1];
  off.chi += 0.15;  // beyond the 0.1 rad heading threshold
  CHECK_FALSE(planner::is_valid(off, &plan, corridor.path(), thresholds, 1));

  off = plan.states[1];
  off.v += 0.6;  // beyond the 0.5 m/s speed threshold
  CHECK_FALSE(planner::is_valid(off, &plan, corridor.path(), thresholds, 1));

  // Too little horizon left to execute a shifted plan.
  CHECK_FALSE(planner::is_valid(plan.states[25], &plan, corridor.path(), thresholds, 25));
}

TEST_CASE("zero deviation shifting reproduces the plan tail") {
  testbed::CorridorFixture fx;
  fx.path = testbed::straight_path(100.0);
  const Corridor corridor = testbed::open_corridor(fx, 100.0, 2.5);
  Planner planner{PlannerSettings{}};
  const PlanRecord plan = planner.plan_step(Variant::Mpc, cruising_start(), corridor, nullptr);

  const EgoState current = plan.states[1];
  const auto shifted = planner::sensitivity_shift(plan, current, corridor.path(), 1);
  REQUIRE(shifted.has_value());
  REQUIRE(shifted->first.size() == plan.states.size() - 1);
  REQUIRE(shifted->second.size() == plan.controls.size() - 1);

  // The head node is pinned to the measurement outright.
  CHECK(shifted->first[0].s == current.s);
  CHECK(shifted->first[0].d == current.d);
  CHECK(shifted->first[0].v == current.v);
  // With no deviation the remaining nodes reproduce the original plan up to
  // the plane-and-back reprojection round-off.
  for (std::size_t j = 1; j < shifted->first.size(); ++j) {
    CHECK(std::abs(shifted->first[j].s - plan.states[j + 1].s) <= 1e-9);
    CHECK(std::abs(shifted->first[j].d - plan.states[j + 1].d) <= 1e-9);
    CHECK(std::abs(shifted->first[j].chi - plan.states[j + 1].chi) <= 1e-9);
    CHECK(std::abs(shifted->first[j].v - plan.states[j + 1].v) <= 1e-12);
  }
  for (std::size_t j = 0; j < shifted->second.size(); ++j) {
    CHECK(shifted->second[j].u1 == plan.controls[j + 1].u1);
    CHECK(shifted->second[j].u2 == plan.controls[j + 1].u2);
  }

  // Shifting farther than the stored horizon is refused.
  CHECK_FALSE(planner::sensitivity_shift(plan, current, corridor.path(), 25).has_value());
  // A record with inconsistent transition bookkeeping is refused.
  PlanRecord tampered = plan;
  tampered.step_transitions.pop_back();
  CHECK_FALSE(planner::sensitivity_shift(tampered, current, corridor.path(), 1).has_value());
}

TEST_CASE("an unavoidable wall raises a tick failure with residual evidence") {
  testbed::CorridorFixture fx;
  fx.path = testbed::straight_path(100.0);
  // A lane-spanning block directly ahead: the corridor seals, the stop point
  // lands at the ramp onset right next to the vehicle, and no dynamically
  // feasible plan can respect the progress bound from 7.5 m/s.
  const Corridor corridor =
      testbed::make_corridor(fx, 100.0, 2.5, {testbed::box_obstacle(9.0, 0.0, 1.0, 3.0, 0.2)});
  REQUIRE(corridor.blockade().blocked);
  REQUIRE(corridor.s_stop() < 6.0);

  Planner planner{PlannerSettings{}};
  bool thrown = false;
  try {
    (void)planner.plan_step(Variant::Mpc, cruising_start(), corridor, nullptr);
  } catch (const TickFailure& failure) {
    thrown = true;
    CHECK(failure.variant == Variant::Mpc);
    CHECK(failure.location.s == doctest::Approx(4.0));
    CHECK(std::string(failure.what()) == "no safe plan found");
    CHECK(failure.residuals[static_cast<int>(ConstraintFamily::Progress)] > 0.0);
  }
  CHECK(thrown);
}

TEST_CASE("single stage homotopy equals the plain controller") {
  auto run_pair = [](const std::vector<planner::Obstacle>& obstacles) {
    testbed::CorridorFixture fx;
    fx.path = testbed::straight_path(120.0);
    fx.config.homotopy_stages = 1;
    const Corridor corridor = testbed::make_corridor(fx, 120.0, 2.5, obstacles);
    REQUIRE(corridor.homotopy_schedule() == std::vector<double>{1.0});

    Planner planner{PlannerSettings{}};
    EgoState x_plain = cruising_start();
    EgoState x_chain = cruising_start();
    PlanRecord plain;
    PlanRecord chain;
    const PlanRecord* prev_plain = nullptr;
    const PlanRecord* prev_chain = nullptr;
    for (int tick = 0; tick < 20; ++tick) {
      plain = planner.plan_step(Variant::Mpc, x_plain, corridor, prev_plain);
      chain = planner.plan_step(Variant::Homotopy, x_chain, corridor, prev_chain);

      CHECK(chain.status == PlanStatus::Optimal);
      CHECK(chain.status == plain.status);
      CHECK(chain.zeta_reached == plain.zeta_reached);
      CHECK(chain.solves == plain.solves);
      CHECK(chain.iterations == plain.iterations);
      REQUIRE(chain.states.size() == plain.states.size());
      double worst = 0.0;
      for (std::size_t k = 0; k < chain.states.size(); ++k) {
        worst = std::max(worst, std::abs(chain.states[k].s - plain.states[k].s));
        worst = std::max(worst, std::abs(chain.states[k].d - plain.states[k].d));
        worst = std::max(worst, std::abs(chain.states[k].chi - plain.states[k].chi));
        worst = std::max(worst, std::abs(chain.states[k].kappa - plain.states[k].kappa));
        worst = std::max(worst, std::abs(chain.states[k].v - plain.states[k].v));
        worst = std::max(worst, std::abs(chain.controls[k].u1 - plain.controls[k].u1));
        worst = std::max(worst, std::abs(chain.controls[k].u2 - plain.controls[k].u2));
      }
      CHECK(worst == 0.0);

      x_plain = plain.states[1];
      x_chain = chain.states[1];
      prev_plain = &plain;
      prev_chain = &chain;
    }
  };

  SUBCASE("open road") { run_pair({}); }
  SUBCASE("one obstacle") { run_pair({testbed::box_obstacle(31.0, -1.2, 1.0, 0.6, 0.2)}); }
  SUBCASE("two obstacles") {
    run_pair({testbed::box_obstacle(35.0, -1.2, 1.0, 0.6, 0.2),
              testbed::box_obstacle(70.0, 1.2, 1.0, 0.6, 0.2)});
  }
}

TEST_CASE("the concurrent backup solve does not change the chosen plan") {
  testbed::CorridorFixture fx;
  fx.path = testbed::straight_path(100.0);
  const Corridor corridor = testbed::open_corridor(fx, 100.0, 2.5);

  PlannerSettings serial;
  serial.concurrent_backup = false;
  Planner planner_serial{serial};
  Planner planner_parallel{PlannerSettings{}};

  const PlanRecord a = planner_serial.plan_step(Variant::StopSafe, cruising_start(), corridor,
                                                nullptr);
  const PlanRecord b = planner_parallel.plan_step(Variant::StopSafe, cruising_start(), corridor,
                                                  nullptr);
  CHECK(a.status == PlanStatus::Optimal);
  CHECK(b.status == PlanStatus::Optimal);
  CHECK(a.solves == 2);
  CHECK(b.solves == 2);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    CHECK(a.states[k].s == b.states[k].s);
    CHECK(a.states[k].d == b.states[k].d);
    CHECK(a.controls[k].u2 == b.controls[k].u2);
  }
}

TEST_CASE("planner construction validates its settings") {
  PlannerSettings bad;
  bad.shift_nodes = 0;
  CHECK_THROWS_AS(Planner{bad}, std::invalid_argument);
  PlannerSettings tiny;
  tiny.horizon.steps = 1;
  CHECK_THROWS_AS(Planner{tiny}, std::invalid_argument);
}
