#include "planner/scenario.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "planner/errors.hpp"

namespace planner {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) { throw ScenarioError(message); }

// Fetches a required field, failing with the dotted path of what is missing.
const json& require(const json& node, const char* key, const std::string& where) {
  auto it = node.find(key);
  if (it == node.end()) fail(where + ": missing required field '" + key + "'");
  return *it;
}

double number(const json& node, const std::string& where) {
  if (!node.is_number()) fail(where + ": expected a number");
  return node.get<double>();
}

double get_number(const json& node, const char* key, const std::string& where, double fallback) {
  auto it = node.find(key);
  return it == node.end() ? fallback : number(*it, where + "." + key);
}

int get_int(const json& node, const char* key, const std::string& where, int fallback) {
  auto it = node.find(key);
  if (it == node.end()) return fallback;
  if (!it->is_number_integer()) fail(where + "." + key + ": expected an integer");
  return it->get<int>();
}

Vec2 point(const json& node, const std::string& where) {
  if (!node.is_array() || node.size() != 2) fail(where + ": expected a [x, y] pair");
  return {number(node[0], where + "[0]"), number(node[1], where + "[1]")};
}

std::vector<Vec2> point_list(const json& node, const std::string& where, size_t minimum) {
  if (!node.is_array()) fail(where + ": expected an array of [x, y] pairs");
  if (node.size() < minimum) {
    fail(where + ": needs at least " + std::to_string(minimum) + " points");
  }
  std::vector<Vec2> points;
  points.reserve(node.size());
  for (size_t i = 0; i < node.size(); ++i) {
    points.push_back(point(node[i], where + "[" + std::to_string(i) + "]"));
  }
  return points;
}

ObstacleMotionModel parse_motion(const json& node, const std::string& where) {
  ObstacleMotionModel model;
  if (node.is_null()) return model;
  const std::string kind = require(node, "kind", where).get<std::string>();
  if (kind == "static") {
    model.kind = ObstacleMotionModel::Kind::ConstantVelocity;
    model.speed = 0.0;
    return model;
  }
  if (kind == "constant_velocity") {
    model.kind = ObstacleMotionModel::Kind::ConstantVelocity;
  } else if (kind == "arc") {
    model.kind = ObstacleMotionModel::Kind::ConstantCurvatureAcceleration;
    model.curvature = get_number(node, "curvature", where, 0.0);
    model.accel = get_number(node, "accel", where, 0.0);
  } else {
    fail(where + ".kind: expected static, constant_velocity, or arc");
  }
  model.speed = get_number(node, "speed", where, 0.0);
  if (model.speed < 0.0) fail(where + ".speed: must be nonnegative");
  return model;
}

Obstacle parse_obstacle(const json& node, const std::string& where) {
  Obstacle obstacle;
  obstacle.footprint = point_list(require(node, "footprint", where), where + ".footprint", 1);
  obstacle.heading = get_number(node, "heading", where, 0.0);
  obstacle.safety_margin = get_number(node, "margin", where, 0.0);
  if (obstacle.safety_margin < 0.0) fail(where + ".margin: must be nonnegative");
  auto it = node.find("motion");
  obstacle.motion = it == node.end() ? ObstacleMotionModel{} : parse_motion(*it, where + ".motion");
  return obstacle;
}

}  // namespace

Variant parse_variant(const std::string& name) {
  if (name == "mpc") return Variant::Mpc;
  if (name == "re") return Variant::Recover;
  if (name == "hb") return Variant::Homotopy;
  if (name == "su") return Variant::SensitivityUpdate;
  if (name == "ss") return Variant::StopSafe;
  fail("variant: expected one of mpc, re, hb, su, ss (got '" + name + "')");
}

Scenario parse_scenario(const std::string& json_text) {
  json root = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (root.is_discarded()) fail("scenario: not valid JSON");
  if (!root.is_object()) fail("scenario: top level must be an object");

  Scenario scenario;
  scenario.name = root.value("name", std::string("unnamed"));
  scenario.path_points = point_list(require(root, "path", "scenario"), "path", 3);
  scenario.right_points = point_list(require(root, "right_boundary", "scenario"),
                                     "right_boundary", 3);
  scenario.left_points = point_list(require(root, "left_boundary", "scenario"),
                                    "left_boundary", 3);
  scenario.road_speed = number(require(root, "road_speed", "scenario"), "road_speed");
  if (scenario.road_speed <= 0.0) fail("road_speed: must be positive");

  const json& ego = require(root, "ego", "scenario");
  scenario.start_position = point(require(ego, "start", "ego"), "ego.start");
  scenario.start_heading = get_number(ego, "heading", "ego", 0.0);
  scenario.start_speed = get_number(ego, "speed", "ego", 0.0);
  if (scenario.start_speed < 0.0) fail("ego.speed: must be nonnegative");
  scenario.ego.width = get_number(ego, "width", "ego", scenario.ego.width);
  scenario.ego.front_length = get_number(ego, "front_length", "ego", scenario.ego.front_length);
  scenario.ego.back_length = get_number(ego, "back_length", "ego", scenario.ego.back_length);
  if (scenario.ego.width <= 0.0 || scenario.ego.front_length <= 0.0 ||
      scenario.ego.back_length <= 0.0) {
    fail("ego: body extents must be positive");
  }

  if (auto it = root.find("control_bounds"); it != root.end()) {
    const json& u1 = require(*it, "u1", "control_bounds");
    const json& u2 = require(*it, "u2", "control_bounds");
    if (!u1.is_array() || u1.size() != 2 || !u2.is_array() || u2.size() != 2) {
      fail("control_bounds: u1 and u2 must be [min, max] pairs");
    }
    scenario.control_bounds.u1_min = number(u1[0], "control_bounds.u1[0]");
    scenario.control_bounds.u1_max = number(u1[1], "control_bounds.u1[1]");
    scenario.control_bounds.u2_min = number(u2[0], "control_bounds.u2[0]");
    scenario.control_bounds.u2_max = number(u2[1], "control_bounds.u2[1]");
    if (scenario.control_bounds.u1_min >= scenario.control_bounds.u1_max ||
        scenario.control_bounds.u2_min >= scenario.control_bounds.u2_max) {
      fail("control_bounds: min must be below max");
    }
    if (scenario.control_bounds.u2_min >= 0.0) fail("control_bounds.u2: must allow braking");
  }

  scenario.lateral_accel_limit =
      get_number(root, "lateral_accel_limit", "scenario", scenario.lateral_accel_limit);
  if (scenario.lateral_accel_limit <= 0.0) fail("lateral_accel_limit: must be positive");

  if (auto it = root.find("obstacles"); it != root.end()) {
    if (!it->is_array()) fail("obstacles: expected an array");
    for (size_t i = 0; i < it->size(); ++i) {
      scenario.obstacles.push_back(
          parse_obstacle((*it)[i], "obstacles[" + std::to_string(i) + "]"));
    }
  }

  if (auto it = root.find("horizon"); it != root.end()) {
    scenario.horizon.horizon = get_number(*it, "length", "horizon", scenario.horizon.horizon);
    scenario.horizon.steps = get_int(*it, "steps", "horizon", scenario.horizon.steps);
    if (scenario.horizon.horizon <= 0.0) fail("horizon.length: must be positive");
    if (scenario.horizon.steps < 2) fail("horizon.steps: needs at least 2");
  }

  if (auto it = root.find("weights"); it != root.end()) {
    ObjectiveWeights& w = scenario.weights;
    w.progress = get_number(*it, "progress", "weights", w.progress);
    w.lateral = get_number(*it, "lateral", "weights", w.lateral);
    w.heading = get_number(*it, "heading", "weights", w.heading);
    w.curvature_rate = get_number(*it, "curvature_rate", "weights", w.curvature_rate);
    w.accel = get_number(*it, "accel", "weights", w.accel);
    w.speed = get_number(*it, "speed", "weights", w.speed);
  }

  if (auto it = root.find("margins"); it != root.end()) {
    ConstraintMargins& m = scenario.margins;
    m.progress = get_number(*it, "progress", "margins", m.progress);
    m.lateral = get_number(*it, "lateral", "margins", m.lateral);
    m.velocity = get_number(*it, "velocity", "margins", m.velocity);
    m.lateral_accel = get_number(*it, "lateral_accel", "margins", m.lateral_accel);
    if (m.progress < 0.0 || m.lateral < 0.0 || m.velocity < 0.0 || m.lateral_accel < 0.0) {
      fail("margins: must be nonnegative");
    }
  }

  if (auto it = root.find("tolerances"); it != root.end()) {
    SafetyTolerances& t = scenario.tolerances;
    t.progress = get_number(*it, "progress", "tolerances", t.progress);
    t.lateral = get_number(*it, "lateral", "tolerances", t.lateral);
    t.velocity = get_number(*it, "velocity", "tolerances", t.velocity);
    t.lateral_accel = get_number(*it, "lateral_accel", "tolerances", t.lateral_accel);
    t.control = get_number(*it, "control", "tolerances", t.control);
  }

  if (auto it = root.find("corridor"); it != root.end()) {
    CorridorConfig& c = scenario.corridor;
    c.omega_min = get_number(*it, "omega_min", "corridor", c.omega_min);
    c.homotopy_stages = get_int(*it, "homotopy_stages", "corridor", c.homotopy_stages);
    c.contour_sample_step =
        get_number(*it, "contour_sample_step", "corridor", c.contour_sample_step);
    c.dilation_step = get_number(*it, "dilation_step", "corridor", c.dilation_step);
    c.ramp_length = get_number(*it, "ramp_length", "corridor", c.ramp_length);
    c.blockade_scan_step = get_number(*it, "blockade_scan_step", "corridor", c.blockade_scan_step);
    c.stop_return_tolerance =
        get_number(*it, "stop_return_tolerance", "corridor", c.stop_return_tolerance);
    if (c.homotopy_stages < 1) fail("corridor.homotopy_stages: needs at least 1");
    if (c.omega_min <= 0.0) fail("corridor.omega_min: must be positive");
  }

  if (auto it = root.find("variant"); it != root.end()) {
    scenario.variant = parse_variant(it->get<std::string>());
  }
  scenario.max_ticks = get_int(root, "max_ticks", "scenario", scenario.max_ticks);
  if (scenario.max_ticks < 1) fail("max_ticks: needs at least 1");
  scenario.finish_progress =
      get_number(root, "finish_progress", "scenario", scenario.finish_progress);

  return scenario;
}

Scenario load_scenario(const std::string& file_path) {
  std::ifstream stream(file_path);
  if (!stream) fail("cannot open scenario file: " + file_path);
  std::ostringstream buffer;
  buffer << stream.rdbuf();
  return parse_scenario(buffer.str());
}

}  // namespace planner
