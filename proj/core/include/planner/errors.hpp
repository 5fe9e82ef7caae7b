#pragma once

#include <stdexcept>

namespace planner {

// Input does not describe a usable shape (too few distinct points, collinear set, ...).
struct DegenerateInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// No curve point found within the capture radius of a query.
struct NoProjection : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A scenario file failed validation.
struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace planner
