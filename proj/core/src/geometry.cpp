#include "planner/geometry.hpp"

#include <algorithm>
#include <cstddef>

#include "planner/errors.hpp"

namespace planner {

namespace {

// > 0 when c lies to the left of the directed line a -> b.
double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b - a).cross(c - a);
}

}  // namespace

double ConvexPolygon::area() const { return polygon_area(vertices_); }

double ConvexPolygon::perimeter() const {
  double p = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    p += distance(vertices_[i], vertices_[(i + 1) % vertices_.size()]);
  }
  return p;
}

ConvexPolygon convex_hull(std::span<const Vec2> points) {
  std::vector<Vec2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  if (pts.size() < 3) {
    throw DegenerateInput("convex_hull: fewer than three distinct points");
  }

  // Anchor: lowest y, then lowest x.
  auto anchor_it = std::min_element(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.y < b.y || (a.y == b.y && a.x < b.x);
  });
  std::swap(*pts.begin(), *anchor_it);
  const Vec2 anchor = pts.front();

  // Polar-angle sort around the anchor; ties (collinear with the anchor) are
  // ordered nearest first so the scan can discard the inner ones.
  std::sort(pts.begin() + 1, pts.end(), [&](const Vec2& a, const Vec2& b) {
    const double turn = orient(anchor, a, b);
    if (turn != 0.0) return turn > 0.0;
    return (a - anchor).squared_norm() < (b - anchor).squared_norm();
  });

  // Points collinear with the anchor along the final ray must come farthest
  // first, otherwise the scan would terminate on an inner point.
  std::size_t tail = pts.size() - 1;
  while (tail > 1 && orient(anchor, pts[tail - 1], pts[tail]) == 0.0) --tail;
  std::reverse(pts.begin() + static_cast<std::ptrdiff_t>(tail), pts.end());

  std::vector<Vec2> hull;
  for (const Vec2& p : pts) {
    // Strict left turns only: collinear boundary points are dropped.
    while (hull.size() >= 2 && orient(hull[hull.size() - 2], hull.back(), p) <= 0.0) {
      hull.pop_back();
    }
    hull.push_back(p);
  }
  if (hull.size() < 3) {
    throw DegenerateInput("convex_hull: points are collinear");
  }
  return ConvexPolygon(std::move(hull));
}

std::vector<Vec2> refine_polygon(const ConvexPolygon& polygon, double max_spacing) {
  if (max_spacing <= 0.0) {
    throw std::invalid_argument("refine_polygon: max_spacing must be positive");
  }
  const auto& v = polygon.vertices();
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2& a = v[i];
    const Vec2& b = v[(i + 1) % v.size()];
    const double len = distance(a, b);
    const auto pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / max_spacing)));
    for (std::size_t j = 0; j < pieces; ++j) {
      const double t = static_cast<double>(j) / static_cast<double>(pieces);
      out.push_back(a + (b - a) * t);
    }
  }
  return out;
}

std::vector<Vec2> clip_half_plane(std::span<const Vec2> polygon, const Vec2& n, double c) {
  std::vector<Vec2> out;
  const std::size_t m = polygon.size();
  if (m == 0) return out;
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2& cur = polygon[i];
    const Vec2& nxt = polygon[(i + 1) % m];
    const double fc = n.dot(cur) - c;
    const double fn = n.dot(nxt) - c;
    if (fc <= 0.0) out.push_back(cur);
    if ((fc < 0.0 && fn > 0.0) || (fc > 0.0 && fn < 0.0)) {
      const double t = fc / (fc - fn);
      out.push_back(cur + (nxt - cur) * t);
    }
  }
  return out;
}

std::vector<Vec2> clip_to_boundary_side(std::span<const Vec2> polygon,
                                        std::span<const Vec2> boundary,
                                        KeepSide keep) {
  if (boundary.size() < 2) {
    throw DegenerateInput("clip_to_boundary_side: boundary needs at least two samples");
  }
  std::vector<Vec2> poly(polygon.begin(), polygon.end());
  if (poly.empty()) return poly;

  double x_lo = poly.front().x;
  double x_hi = poly.front().x;
  for (const Vec2& p : poly) {
    x_lo = std::min(x_lo, p.x);
    x_hi = std::max(x_hi, p.x);
  }

  for (std::size_t i = 0; i + 1 < boundary.size() && !poly.empty(); ++i) {
    const Vec2& a = boundary[i];
    const Vec2& b = boundary[i + 1];
    if (b.x <= a.x) {
      throw DegenerateInput("clip_to_boundary_side: boundary x must be strictly increasing");
    }
    if (b.x < x_lo || a.x > x_hi) continue;  // segment cannot touch the polygon
    // Supporting line through a-b. Left of the direction (a->b) is above.
    const Vec2 dir = b - a;
    const Vec2 n{-dir.y, dir.x};  // points to the "above" side
    if (keep == KeepSide::Above) {
      // keep n.dot(p) >= n.dot(a)  <=>  (-n).dot(p) <= -n.dot(a)
      poly = clip_half_plane(poly, Vec2{-n.x, -n.y}, -n.dot(a));
    } else {
      poly = clip_half_plane(poly, n, n.dot(a));
    }
  }
  return poly;
}

double polygon_area(std::span<const Vec2> polygon) {
  double twice = 0.0;
  const std::size_t m = polygon.size();
  for (std::size_t i = 0; i < m; ++i) {
    twice += polygon[i].cross(polygon[(i + 1) % m]);
  }
  return 0.5 * twice;
}

namespace {

bool separates(std::span<const Vec2> a, std::span<const Vec2> b) {
  const std::size_t m = a.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2 edge = a[(i + 1) % m] - a[i];
    const Vec2 n{-edge.y, edge.x};
    double a_min = n.dot(a[0]), a_max = a_min;
    for (const Vec2& p : a) {
      const double v = n.dot(p);
      a_min = std::min(a_min, v);
      a_max = std::max(a_max, v);
    }
    double b_min = n.dot(b[0]), b_max = b_min;
    for (const Vec2& p : b) {
      const double v = n.dot(p);
      b_min = std::min(b_min, v);
      b_max = std::max(b_max, v);
    }
    if (a_max < b_min || b_max < a_min) return true;
  }
  return false;
}

}  // namespace

bool convex_polygons_intersect(std::span<const Vec2> a, std::span<const Vec2> b) {
  if (a.empty() || b.empty()) return false;
  return !separates(a, b) && !separates(b, a);
}

double wrap_angle(double a) {
  constexpr double kPi = 3.14159265358979323846;
  double r = std::fmod(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  if (r > kPi) r -= 2.0 * kPi;
  return r;
}

}  // namespace planner
