#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "planner/errors.hpp"
#include "planner/geometry.hpp"

using planner::ConvexPolygon;
using planner::Vec2;

namespace {

// Rotates a vertex loop so it starts at the lowest point (ties by lowest x),
// letting two hulls be compared element by element.
std::vector<Vec2> canonical(std::vector<Vec2> loop) {
  std::size_t lowest = 0;
  for (std::size_t i = 1; i < loop.size(); ++i) {
    if (loop[i].y < loop[lowest].y ||
        (loop[i].y == loop[lowest].y && loop[i].x < loop[lowest].x)) {
      lowest = i;
    }
  }
  std::rotate(loop.begin(), loop.begin() + static_cast<std::ptrdiff_t>(lowest), loop.end());
  return loop;
}

std::vector<Vec2> random_cloud(std::mt19937& rng, bool integer_grid) {
  std::uniform_int_distribution<int> count(3, 40);
  const int n = count(rng);
  std::vector<Vec2> points;
  points.reserve(static_cast<std::size_t>(n));
  if (integer_grid) {
    // Integer coordinates force exact duplicates and collinear runs.
    std::uniform_int_distribution<int> coord(-5, 5);
    for (int i = 0; i < n; ++i) {
      points.push_back({static_cast<double>(coord(rng)), static_cast<double>(coord(rng))});
    }
  } else {
    std::uniform_real_distribution<double> coord(-10.0, 10.0);
    for (int i = 0; i < n; ++i) points.push_back({coord(rng), coord(rng)});
  }
  return points;
}

}  // namespace

TEST_CASE("convex hull matches the brute-force reference on random clouds") {
  std::mt19937 rng(20240811);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<Vec2> points = random_cloud(rng, trial % 2 == 0);
    std::vector<Vec2> expected;
    try {
      expected = oracle::brute_hull(points);
    } catch (const std::invalid_argument&) {
      CHECK_THROWS_AS((void)planner::convex_hull(points), planner::DegenerateInput);
      continue;
    }
    const std::vector<Vec2> actual = canonical(planner::convex_hull(points).vertices());
    const std::vector<Vec2> reference = canonical(expected);
    REQUIRE(actual.size() == reference.size());
    for (std::size_t i = 0; i < actual.size(); ++i) {
      CHECK(actual[i].x == doctest::Approx(reference[i].x).epsilon(1e-12));
      CHECK(actual[i].y == doctest::Approx(reference[i].y).epsilon(1e-12));
    }
    ++checked;
  }
  // The degenerate skips above are rare; the bulk of the trials must have
  // produced a real hull comparison.
  CHECK(checked >= 150);
}

TEST_CASE("convex hull drops collinear boundary points") {
  const std::vector<Vec2> points = {{0, 0}, {1, 0}, {2, 0}, {2, 2}, {1, 2}, {0, 2}, {0, 1}, {2, 1}};
  const ConvexPolygon hull = planner::convex_hull(points);
  REQUIRE(hull.size() == 4);
  CHECK(hull.area() == doctest::Approx(4.0));
  CHECK(hull.perimeter() == doctest::Approx(8.0));
}

TEST_CASE("convex hull rejects degenerate input") {
  CHECK_THROWS_AS((void)planner::convex_hull(std::vector<Vec2>{{0, 0}, {1, 1}}),
                  planner::DegenerateInput);
  CHECK_THROWS_AS((void)planner::convex_hull(std::vector<Vec2>{{1, 1}, {1, 1}, {1, 1}, {1, 1}}),
                  planner::DegenerateInput);
  CHECK_THROWS_AS((void)planner::convex_hull(std::vector<Vec2>{{0, 0}, {1, 1}, {2, 2}, {3, 3}}),
                  planner::DegenerateInput);
}

TEST_CASE("boundary clip area matches a Monte-Carlo estimate") {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> coord(-4.0, 4.0);
  int compared = 0;
  for (int trial = 0; trial < 12; ++trial) {
    std::vector<Vec2> cloud;
    for (int i = 0; i < 12; ++i) cloud.push_back({coord(rng), coord(rng)});
    std::vector<Vec2> polygon;
    try {
      polygon = planner::convex_hull(cloud).vertices();
    } catch (const planner::DegenerateInput&) {
      continue;
    }
    double x_lo = polygon[0].x, x_hi = polygon[0].x;
    for (const Vec2& p : polygon) {
      x_lo = std::min(x_lo, p.x);
      x_hi = std::max(x_hi, p.x);
    }
    // A wavy boundary crossing the polygon's vertical extent.
    std::vector<Vec2> boundary;
    std::uniform_real_distribution<double> level(-1.5, 1.5);
    for (int i = 0; i <= 5; ++i) {
      boundary.push_back({x_lo - 1.0 + (x_hi - x_lo + 2.0) * i / 5.0, level(rng)});
    }
    const bool keep_above = trial % 2 == 0;
    const std::vector<Vec2> clipped = planner::clip_to_boundary_side(
        polygon, boundary, keep_above ? planner::KeepSide::Above : planner::KeepSide::Below);
    const double clip_area = clipped.empty() ? 0.0 : planner::polygon_area(clipped);
    const double mc_area =
        oracle::monte_carlo_clip_area(polygon, boundary, keep_above, 1'200'000, rng);
    const double polygon_area = planner::polygon_area(polygon);
    CHECK(std::abs(clip_area - mc_area) <= 0.01 * polygon_area);
    ++compared;
  }
  CHECK(compared >= 10);
}

TEST_CASE("half-plane clip of the unit square") {
  const std::vector<Vec2> square = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const std::vector<Vec2> kept = planner::clip_half_plane(square, {1.0, 0.0}, 0.5);
  REQUIRE(kept.size() == 4);
  CHECK(planner::polygon_area(kept) == doctest::Approx(0.5));
  for (const Vec2& p : kept) CHECK(p.x <= 0.5 + 1e-12);
}

TEST_CASE("boundary clip keeps everything or nothing at the extremes") {
  const std::vector<Vec2> square = {{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  const std::vector<Vec2> below_all = {{-1, -5}, {3, -5}};
  const std::vector<Vec2> above_all = {{-1, 5}, {3, 5}};
  CHECK(planner::polygon_area(planner::clip_to_boundary_side(square, below_all,
                                                             planner::KeepSide::Above)) ==
        doctest::Approx(4.0));
  CHECK(planner::clip_to_boundary_side(square, above_all, planner::KeepSide::Above).empty());
  CHECK(planner::clip_to_boundary_side(square, below_all, planner::KeepSide::Below).empty());
}

TEST_CASE("shoelace area on basic shapes") {
  const std::vector<Vec2> square = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const std::vector<Vec2> triangle = {{0, 0}, {1, 0}, {0, 1}};
  CHECK(planner::polygon_area(square) == doctest::Approx(1.0));
  CHECK(planner::polygon_area(triangle) == doctest::Approx(0.5));
}

TEST_CASE("polygon refinement keeps vertices and bounds edge spacing") {
  const std::vector<Vec2> cloud = {{0, 0}, {4, 0}, {4, 3}, {0, 3}};
  const ConvexPolygon hull = planner::convex_hull(cloud);
  const double spacing = 0.7;
  const std::vector<Vec2> refined = planner::refine_polygon(hull, spacing);
  REQUIRE(refined.size() >= hull.size());
  for (std::size_t i = 0; i < refined.size(); ++i) {
    const Vec2& a = refined[i];
    const Vec2& b = refined[(i + 1) % refined.size()];
    CHECK(planner::distance(a, b) <= spacing + 1e-12);
  }
  for (const Vec2& v : hull.vertices()) {
    const bool present = std::any_of(refined.begin(), refined.end(), [&](const Vec2& p) {
      return planner::distance(p, v) < 1e-12;
    });
    CHECK(present);
  }
  double perimeter = 0.0;
  for (std::size_t i = 0; i < refined.size(); ++i) {
    perimeter += planner::distance(refined[i], refined[(i + 1) % refined.size()]);
  }
  CHECK(perimeter == doctest::Approx(hull.perimeter()).epsilon(1e-12));
}

TEST_CASE("angle wrapping lands in (-pi, pi]") {
  const double pi = 3.14159265358979323846;
  CHECK(planner::wrap_angle(0.0) == doctest::Approx(0.0));
  CHECK(planner::wrap_angle(pi) == doctest::Approx(pi));
  CHECK(planner::wrap_angle(-pi) == doctest::Approx(pi));
  CHECK(planner::wrap_angle(3.0 * pi) == doctest::Approx(pi));
  CHECK(planner::wrap_angle(2.0 * pi) == doctest::Approx(0.0));
  CHECK(planner::wrap_angle(-0.1) == doctest::Approx(-0.1));
  CHECK(planner::wrap_angle(7.5 * pi) == doctest::Approx(-0.5 * pi));
}

TEST_CASE("separating-axis intersection on squares") {
  const std::vector<Vec2> a = {{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  const std::vector<Vec2> apart = {{3, 0}, {5, 0}, {5, 2}, {3, 2}};
  const std::vector<Vec2> overlap = {{1, 1}, {3, 1}, {3, 3}, {1, 3}};
  const std::vector<Vec2> touching = {{2, 0}, {4, 0}, {4, 2}, {2, 2}};
  CHECK_FALSE(planner::convex_polygons_intersect(a, apart));
  CHECK(planner::convex_polygons_intersect(a, overlap));
  CHECK(planner::convex_polygons_intersect(a, touching));
  CHECK(planner::convex_polygons_intersect(a, a));
}
