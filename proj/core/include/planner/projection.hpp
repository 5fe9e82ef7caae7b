#pragma once

#include <span>
#include <vector>

#include "planner/dynamics.hpp"
#include "planner/geometry.hpp"
#include "planner/polyline.hpp"
#include "planner/spline.hpp"

namespace planner {

struct Obstacle {
  std::vector<Vec2> footprint;  // plane corners [m]
  ObstacleMotionModel motion;
  double heading = 0.0;        // initial travel direction in the plane [rad]
  double safety_margin = 0.0;  // extra lateral clearance required around it [m]
};

struct ProjectionConfig {
  double refine_spacing = 0.25;       // max vertex spacing after refinement [m]
  double boundary_step = 0.25;        // boundary sampling for local projections [m]
  double window_slack = 2.0;          // boundary window margin past the polygon [m]
  double degenerate_inflation = 0.1;  // square side replacing 1-2 point footprints [m]
  ProjectionSettings path_projection;
};

struct AnchorPose {
  double s = 0.0;
  double d = 0.0;
  double theta = 0.0;
};

// Per-step protrusion of one obstacle into the lane, in road coordinates.
// polygons[k] is the part of the predicted footprint on the in-lane side of
// the nearest boundary at step k; it can be empty. The footprint moves rigidly
// with the anchor: vertex i sits at polar offset (radii[i], angles[i]) from
// the anchor, angles measured relative to the anchor heading at step 0.
struct ProtrusionSet {
  int eta = -1;  // -1: nearest to the right boundary, +1: left
  std::vector<std::vector<Vec2>> polygons;
  std::vector<AnchorPose> anchors;
  std::vector<double> radii;
  std::vector<double> angles;
  double safety_margin = 0.0;
};

// Side of the lane an obstacle hugs: -1 right, +1 left. Ties (symmetric
// placement) resolve to the right. points_sd is the footprint in road
// coordinates at the current instant.
int nearest_edge(std::span<const Vec2> points_sd, const BoundarySpline1D& right,
                 const BoundarySpline1D& left, const ProjectionConfig& config = {});

// Full obstacle-to-corridor projection: hull + refinement of the footprint,
// road-frame transform, anchor prediction over `steps` intervals of dt,
// rigid-body reconstruction per step, and clipping against the eta boundary
// in its own frame. Throws NoProjection when the footprint is farther than
// the capture radius from the path.
ProtrusionSet project_obstacle(const Obstacle& obstacle, const PathSpline2D& path,
                               const BoundarySpline1D& right, const BoundarySpline1D& left,
                               double dt, int steps, const ProjectionConfig& config = {});

// Hull of a footprint; degenerate inputs (fewer than three distinct points or
// a collinear set) are inflated to small squares first so the pipeline always
// has a polygon to work with.
std::vector<Vec2> prepare_footprint(std::span<const Vec2> footprint, double inflation);

}  // namespace planner
