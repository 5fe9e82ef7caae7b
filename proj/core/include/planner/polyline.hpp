#pragma once

#include <span>
#include <vector>

#include "planner/geometry.hpp"
#include "planner/spline.hpp"

namespace planner {

// Polyline with a parameter value stored per vertex, used to move points
// between nearby curve frames: project() finds the nearest foot point and
// returns (parameter, signed offset), unproject() maps such a pair back to the
// plane. Within one segment the two are exact inverses, which keeps clipped
// polygons on the intended side of a boundary after the round trip.
class PlanarPolyline {
 public:
  struct Foot {
    double param = 0.0;
    double offset = 0.0;  // left of the segment direction is positive
  };

  // params must be strictly increasing and match points in size (>= 2).
  PlanarPolyline(std::vector<double> params, std::vector<Vec2> points);

  // Nearest foot over all segments. Feet that would fall more than slack
  // beyond either end raise std::domain_error (window exhausted); closer
  // overshoots clamp onto the end vertex.
  Foot project(const Vec2& point, double slack = 1.0) const;
  Vec2 unproject(double param, double offset) const;

  double param_min() const { return params_.front(); }
  double param_max() const { return params_.back(); }
  const std::vector<Vec2>& points() const { return points_; }
  const std::vector<double>& params() const { return params_; }

  // Graph of a lateral-offset spline: vertices (s, b(s)) sampled every step
  // over [s_lo, s_hi], parameterized by s.
  static PlanarPolyline from_boundary(const BoundarySpline1D& boundary, double s_lo, double s_hi,
                                      double step);
  // The reference axis d = 0 of the road plane (two vertices suffice).
  static PlanarPolyline axis(double s_lo, double s_hi);

 private:
  std::vector<double> params_;
  std::vector<Vec2> points_;
};

// Re-expresses (parameter, offset) pairs relative to `from` as pairs relative
// to `to`. Points are carried through the shared plane.
std::vector<Vec2> local_projection(const PlanarPolyline& from, const PlanarPolyline& to,
                                   std::span<const Vec2> param_offset_points);

}  // namespace planner
