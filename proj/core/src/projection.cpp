#include "planner/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "planner/errors.hpp"

namespace planner {

std::vector<Vec2> prepare_footprint(std::span<const Vec2> footprint, double inflation) {
  if (footprint.empty()) {
    throw DegenerateInput("prepare_footprint: empty footprint");
  }
  if (footprint.size() >= 3) {
    try {
      return convex_hull(footprint).vertices();
    } catch (const DegenerateInput&) {
      // fall through to inflation
    }
  }
  const double h = inflation / 2.0;
  std::vector<Vec2> grown;
  grown.reserve(footprint.size() * 4);
  for (const Vec2& p : footprint) {
    grown.push_back({p.x - h, p.y - h});
    grown.push_back({p.x + h, p.y - h});
    grown.push_back({p.x + h, p.y + h});
    grown.push_back({p.x - h, p.y + h});
  }
  return convex_hull(grown).vertices();
}

namespace {

struct Extent {
  double lo;
  double hi;
};

Extent s_extent(std::span<const Vec2> pts) {
  Extent e{pts.front().x, pts.front().x};
  for (const Vec2& p : pts) {
    e.lo = std::min(e.lo, p.x);
    e.hi = std::max(e.hi, p.x);
  }
  return e;
}

PlanarPolyline boundary_window(const BoundarySpline1D& boundary, Extent extent,
                               const ProjectionConfig& config) {
  const double lo = std::max(boundary.t_min(), extent.lo - config.window_slack);
  const double hi = std::min(boundary.t_max(), extent.hi + config.window_slack);
  return PlanarPolyline::from_boundary(boundary, lo, std::max(hi, lo + config.boundary_step),
                                       config.boundary_step);
}

}  // namespace

int nearest_edge(std::span<const Vec2> points_sd, const BoundarySpline1D& right,
                 const BoundarySpline1D& left, const ProjectionConfig& config) {
  if (points_sd.empty()) {
    throw DegenerateInput("nearest_edge: no points");
  }
  const Extent extent = s_extent(points_sd);
  const PlanarPolyline right_line = boundary_window(right, extent, config);
  const PlanarPolyline left_line = boundary_window(left, extent, config);

  // Extreme offsets seen from each boundary, positive toward larger d.
  double d_r = std::numeric_limits<double>::infinity();
  double d_l = -std::numeric_limits<double>::infinity();
  for (const Vec2& p : points_sd) {
    d_r = std::min(d_r, right_line.project(p, config.window_slack).offset);
    d_l = std::max(d_l, left_line.project(p, config.window_slack).offset);
  }
  // Right when fully outside one of the edges or at least as close to the
  // right edge as to the left one.
  const bool right_side = (d_r <= 0.0 && d_l <= 0.0) || d_r <= -d_l;
  return right_side ? -1 : +1;
}

ProtrusionSet project_obstacle(const Obstacle& obstacle, const PathSpline2D& path,
                               const BoundarySpline1D& right, const BoundarySpline1D& left,
                               double dt, int steps, const ProjectionConfig& config) {
  if (steps < 0 || dt <= 0.0) {
    throw std::invalid_argument("project_obstacle: need dt > 0 and steps >= 0");
  }
  const std::vector<Vec2> refined_xy = refine_polygon(
      convex_hull(prepare_footprint(obstacle.footprint, config.degenerate_inflation)),
      config.refine_spacing);

  // Current footprint in road coordinates.
  std::vector<Vec2> points_sd;
  points_sd.reserve(refined_xy.size());
  for (const Vec2& p : refined_xy) {
    const FrenetPose pose = path.project(p, 0.0, config.path_projection);
    points_sd.push_back({pose.s, pose.d});
  }

  ProtrusionSet result;
  result.safety_margin = obstacle.safety_margin;
  result.eta = nearest_edge(points_sd, right, left, config);

  // Anchor at the footprint centroid; vertex offsets stored in polar form
  // relative to the anchor heading so the shape moves rigidly with it.
  Vec2 anchor{0.0, 0.0};
  for (const Vec2& p : points_sd) anchor = anchor + p;
  anchor = anchor / static_cast<double>(points_sd.size());
  const double theta0 = wrap_angle(obstacle.heading - path.heading(anchor.x));

  result.radii.reserve(points_sd.size());
  result.angles.reserve(points_sd.size());
  for (const Vec2& p : points_sd) {
    const Vec2 off = p - anchor;
    result.radii.push_back(off.norm());
    result.angles.push_back(off.norm() > 0.0 ? std::atan2(off.y, off.x) - theta0 : 0.0);
  }

  const std::vector<PlanarMotionState> anchors = predict_anchor(
      obstacle.motion, {anchor.x, anchor.y, theta0, obstacle.motion.speed}, dt, steps);
  result.anchors.reserve(anchors.size());
  for (const PlanarMotionState& a : anchors) {
    result.anchors.push_back({a.x, a.y, a.theta});
  }

  const BoundarySpline1D& side = result.eta < 0 ? right : left;
  const KeepSide keep = result.eta < 0 ? KeepSide::Above : KeepSide::Below;
  const double road_len = path.length();

  result.polygons.resize(anchors.size());
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    const AnchorPose& a = result.anchors[k];
    std::vector<Vec2> poly;
    poly.reserve(points_sd.size());
    for (std::size_t i = 0; i < points_sd.size(); ++i) {
      const double ang = result.angles[i] + a.theta;
      poly.push_back({a.s + result.radii[i] * std::cos(ang), a.d + result.radii[i] * std::sin(ang)});
    }

    // Restrict to the road's arc-length domain before touching the boundary.
    Extent extent = s_extent(poly);
    if (extent.hi > road_len) {
      poly = clip_half_plane(poly, {1.0, 0.0}, road_len);
    }
    if (!poly.empty() && extent.lo < 0.0) {
      poly = clip_half_plane(poly, {-1.0, 0.0}, 0.0);
    }
    if (poly.size() < 3) continue;
    extent = s_extent(poly);
    if (extent.hi - extent.lo < 1e-9) continue;

    // Move into the boundary's own frame, cut at the boundary (one pass, the
    // boundary is its own zero line there), and come back.
    const PlanarPolyline window = boundary_window(side, extent, config);
    std::vector<Vec2> local;
    local.reserve(poly.size());
    bool lost = false;
    for (const Vec2& p : poly) {
      try {
        const auto foot = window.project(p, config.window_slack);
        local.push_back({foot.param, foot.offset});
      } catch (const std::domain_error&) {
        lost = true;
        break;
      }
    }
    if (lost) continue;

    const Vec2 zero_a{window.param_min() - 1.0, 0.0};
    const Vec2 zero_b{window.param_max() + 1.0, 0.0};
    const std::vector<Vec2> zero_line{zero_a, zero_b};
    const std::vector<Vec2> clipped = clip_to_boundary_side(local, zero_line, keep);
    if (clipped.size() < 3) continue;

    std::vector<Vec2>& out = result.polygons[k];
    out.reserve(clipped.size());
    for (const Vec2& q : clipped) {
      out.push_back(window.unproject(q.x, q.y));
    }
  }
  return result;
}

}  // namespace planner
