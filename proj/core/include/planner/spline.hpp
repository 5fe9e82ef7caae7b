#pragma once

#include <span>
#include <utility>
#include <vector>

#include "planner/geometry.hpp"

namespace planner {

// Natural cubic spline through (t_i, y_i): zero second derivative at both
// ends. Evaluation outside the knot range extends linearly along the end
// tangents; in_domain tells whether a query had to be extrapolated.
class CubicSpline1D {
 public:
  CubicSpline1D() = default;
  // Knots must be strictly increasing and at least two. With exactly two
  // knots the spline degenerates to the connecting line.
  CubicSpline1D(std::vector<double> t, std::vector<double> y);

  double value(double t) const;
  double derivative(double t) const;
  double second_derivative(double t) const;
  double third_derivative(double t) const;

  double t_min() const { return t_.front(); }
  double t_max() const { return t_.back(); }
  bool in_domain(double t) const { return t >= t_min() && t <= t_max(); }
  const std::vector<double>& knots() const { return t_; }
  const std::vector<double>& knot_values() const { return y_; }

 private:
  std::size_t segment(double t) const;
  std::vector<double> t_;
  std::vector<double> y_;
  // Per-segment cubic coefficients: y = a + b dt + c dt^2 + d dt^3.
  std::vector<double> b_, c_, d_;
};

// Lateral boundary offset as a function of arc length along the road.
using BoundarySpline1D = CubicSpline1D;

// Road pose: arc length s, signed lateral offset d (left positive), and the
// heading difference to the road tangent.
struct FrenetPose {
  double s = 0.0;
  double d = 0.0;
  double heading_diff = 0.0;
};

struct ProjectionSettings {
  double capture_radius = 50.0;   // reject queries farther than this from the curve [m]
  double presample_step = 0.5;    // spacing of the cached seed samples [m]
  int newton_seeds = 16;          // best presamples polished per query
  int newton_iterations = 20;
  double newton_tolerance = 1e-10;
};

// Planar curve parameterized by arc length, fitted as two natural cubic
// splines x(s), y(s). The fit runs twice: first over cumulative chord length,
// then re-parameterized by the measured arc length so |gamma'(s)| stays within
// about a percent of one.
class PathSpline2D {
 public:
  PathSpline2D() = default;

  // Needs at least three points, consecutive points distinct.
  static PathSpline2D fit(std::span<const Vec2> points);

  Vec2 position(double s) const;
  Vec2 tangent(double s) const;       // unnormalized derivative
  Vec2 left_normal(double s) const;   // unit normal, left of travel
  double heading(double s) const;
  double length() const { return length_; }
  bool in_domain(double s) const { return s >= 0.0 && s <= length_; }

  // Signed curvature x'y'' - x''y'. Throws std::domain_error outside [0, L].
  double curvature(double s) const;
  // Clamps s into [0, L] first; safe for transient solver queries past the ends.
  double curvature_clamped(double s) const;
  double curvature_derivative_clamped(double s) const;

  // Nearest-point projection: dense seed samples refined by Newton iterations
  // on the distance derivative. Throws NoProjection when the curve is farther
  // than settings.capture_radius. heading is the query's own travel direction,
  // used to fill FrenetPose::heading_diff.
  FrenetPose project(const Vec2& point, double heading,
                     const ProjectionSettings& settings = {}) const;

  // Road pose back to the plane; returns position and absolute heading.
  std::pair<Vec2, double> to_cartesian(const FrenetPose& pose) const;

 private:
  CubicSpline1D x_;
  CubicSpline1D y_;
  double length_ = 0.0;
  // Seed cache for project(): positions every presample step.
  std::vector<double> seed_s_;
  std::vector<Vec2> seed_p_;
};

}  // namespace planner
