#pragma once

#include <string>
#include <vector>

#include "planner/corridor.hpp"
#include "planner/mpc.hpp"
#include "planner/projection.hpp"

namespace planner {

// Declarative description of one closed-loop run: road geometry as plane
// point lists, the ego start, the obstacle set, and every tunable the
// planner stack takes. Loaded from a JSON file and schema-validated.
struct Scenario {
  std::string name;
  std::vector<Vec2> path_points;
  std::vector<Vec2> right_points;
  std::vector<Vec2> left_points;
  double road_speed = 0.0;

  Vec2 start_position{0.0, 0.0};
  double start_heading = 0.0;
  double start_speed = 0.0;
  EgoGeometry ego;

  ControlBounds control_bounds;
  double lateral_accel_limit = 4.0;

  std::vector<Obstacle> obstacles;

  HorizonConfig horizon;
  ObjectiveWeights weights;
  ConstraintMargins margins;
  SafetyTolerances tolerances;
  ValidityThresholds validity;
  CorridorConfig corridor;

  Variant variant = Variant::Mpc;
  int max_ticks = 2000;
  // Arc length along the reference path that counts as done; negative means
  // "15 m before the path end".
  double finish_progress = -1.0;
};

// Maps the CLI/scenario spelling (mpc, re, hb, su, ss) to a variant.
// Throws ScenarioError on anything else.
Variant parse_variant(const std::string& name);

// Parses and validates a scenario from JSON text. Throws ScenarioError with
// a field-specific message on schema or sanity violations.
Scenario parse_scenario(const std::string& json_text);

// Reads the file and hands it to parse_scenario. Throws ScenarioError when
// the file cannot be read.
Scenario load_scenario(const std::string& file_path);

}  // namespace planner
