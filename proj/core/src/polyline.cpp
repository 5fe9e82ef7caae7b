#include "planner/polyline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace planner {

PlanarPolyline::PlanarPolyline(std::vector<double> params, std::vector<Vec2> points)
    : params_(std::move(params)), points_(std::move(points)) {
  if (params_.size() != points_.size() || params_.size() < 2) {
    throw std::invalid_argument("PlanarPolyline: need at least two parameterized vertices");
  }
  for (std::size_t i = 1; i < params_.size(); ++i) {
    if (params_[i] <= params_[i - 1]) {
      throw std::invalid_argument("PlanarPolyline: parameters must be strictly increasing");
    }
  }
}

PlanarPolyline::Foot PlanarPolyline::project(const Vec2& point, double slack) const {
  double best_d2 = std::numeric_limits<double>::infinity();
  Foot best;
  double overshoot = 0.0;  // tangential excess past an end vertex, if clamped there

  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    const Vec2& a = points_[i];
    const Vec2& b = points_[i + 1];
    const Vec2 ab = b - a;
    const double len2 = ab.squared_norm();
    double t = len2 > 0.0 ? (point - a).dot(ab) / len2 : 0.0;
    double over = 0.0;
    if (i == 0 && t < 0.0) over = -t * std::sqrt(len2);
    if (i + 2 == points_.size() && t > 1.0) over = (t - 1.0) * std::sqrt(len2);
    t = std::clamp(t, 0.0, 1.0);
    const Vec2 foot = a + ab * t;
    const double d2 = (point - foot).squared_norm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best.param = params_[i] + t * (params_[i + 1] - params_[i]);
      const Vec2 n{-ab.y, ab.x};
      best.offset = n.dot(point - foot) / std::sqrt(len2);
      overshoot = over;
    }
  }
  if (overshoot > slack) {
    throw std::domain_error("PlanarPolyline::project: query beyond the sampled window");
  }
  return best;
}

Vec2 PlanarPolyline::unproject(double param, double offset) const {
  const auto it = std::upper_bound(params_.begin(), params_.end(), param);
  std::size_t i = it == params_.begin() ? 0 : static_cast<std::size_t>(it - params_.begin()) - 1;
  i = std::min(i, params_.size() - 2);
  const Vec2& a = points_[i];
  const Vec2& b = points_[i + 1];
  const Vec2 ab = b - a;
  const double t = (param - params_[i]) / (params_[i + 1] - params_[i]);
  const Vec2 foot = a + ab * t;
  const Vec2 n{-ab.y, ab.x};
  return foot + n * (offset / ab.norm());
}

PlanarPolyline PlanarPolyline::from_boundary(const BoundarySpline1D& boundary, double s_lo,
                                             double s_hi, double step) {
  if (s_hi <= s_lo || step <= 0.0) {
    throw std::invalid_argument("PlanarPolyline::from_boundary: bad window");
  }
  const auto count =
      std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil((s_hi - s_lo) / step)) + 1);
  std::vector<double> params(count);
  std::vector<Vec2> pts(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double s = s_lo + (s_hi - s_lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    params[i] = s;
    pts[i] = {s, boundary.value(s)};
  }
  return PlanarPolyline(std::move(params), std::move(pts));
}

PlanarPolyline PlanarPolyline::axis(double s_lo, double s_hi) {
  return PlanarPolyline({s_lo, s_hi}, {{s_lo, 0.0}, {s_hi, 0.0}});
}

std::vector<Vec2> local_projection(const PlanarPolyline& from, const PlanarPolyline& to,
                                   std::span<const Vec2> param_offset_points) {
  std::vector<Vec2> out;
  out.reserve(param_offset_points.size());
  for (const Vec2& po : param_offset_points) {
    const Vec2 plane = from.unproject(po.x, po.y);
    const auto foot = to.project(plane);
    out.push_back({foot.param, foot.offset});
  }
  return out;
}

}  // namespace planner
