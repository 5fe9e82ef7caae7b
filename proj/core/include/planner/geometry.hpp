#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace planner {

// Planar point / vector. In road coordinates x carries the arc length s and
// y the signed lateral offset d (positive to the left of the travel direction).
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double a) const { return {x * a, y * a}; }
  Vec2 operator/(double a) const { return {x / a, y / a}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double squared_norm() const { return x * x + y * y; }
  double norm() const { return std::sqrt(squared_norm()); }
};

inline Vec2 operator*(double a, const Vec2& v) { return v * a; }
inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

// Counter-clockwise, strictly convex vertex loop. Construct through convex_hull.
class ConvexPolygon {
 public:
  const std::vector<Vec2>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  double area() const;
  double perimeter() const;

 private:
  friend ConvexPolygon convex_hull(std::span<const Vec2> points);
  explicit ConvexPolygon(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {}
  std::vector<Vec2> vertices_;
};

// Graham's scan. Anchor is the lowest-y point (ties broken by lowest x); the
// remaining points are sorted by polar angle around it and collinear points on
// the hull boundary are dropped, so the result is strictly convex.
// Throws DegenerateInput when fewer than three distinct points remain or all
// points are collinear.
ConvexPolygon convex_hull(std::span<const Vec2> points);

// Subdivides every edge into equal pieces no longer than max_spacing.
// Original vertices are kept; the closing vertex is not repeated.
std::vector<Vec2> refine_polygon(const ConvexPolygon& polygon, double max_spacing);

enum class KeepSide { Above, Below };

// Clips a convex polygon against a piecewise-linear boundary y = b(x), keeping
// the requested side. The boundary samples must be strictly increasing in x and
// must cover the polygon's x extent. One Sutherland-Hodgman pass is run per
// boundary segment whose x range overlaps the polygon, each clipping at that
// segment's supporting line. Returns an empty list when nothing survives.
std::vector<Vec2> clip_to_boundary_side(std::span<const Vec2> polygon,
                                        std::span<const Vec2> boundary,
                                        KeepSide keep);

// Clips a convex polygon against a single half-plane {p : n.dot(p) <= c}.
std::vector<Vec2> clip_half_plane(std::span<const Vec2> polygon, const Vec2& n, double c);

// Shoelace area of a simple polygon given in counter-clockwise order.
double polygon_area(std::span<const Vec2> polygon);

// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

// Separating-axis intersection test for two convex polygons (any consistent
// winding). Touching counts as intersecting.
bool convex_polygons_intersect(std::span<const Vec2> a, std::span<const Vec2> b);

}  // namespace planner
