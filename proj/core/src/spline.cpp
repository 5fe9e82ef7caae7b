#include "planner/spline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "planner/errors.hpp"

namespace planner {

CubicSpline1D::CubicSpline1D(std::vector<double> t, std::vector<double> y)
    : t_(std::move(t)), y_(std::move(y)) {
  const std::size_t n = t_.size();
  if (n < 2 || y_.size() != n) {
    throw std::invalid_argument("CubicSpline1D: need at least two knots and matching values");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (t_[i] <= t_[i - 1]) {
      throw std::invalid_argument("CubicSpline1D: knots must be strictly increasing");
    }
  }

  std::vector<double> h(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) h[i] = t_[i + 1] - t_[i];

  // Second derivatives sigma with natural end conditions, Thomas algorithm.
  std::vector<double> sigma(n, 0.0);
  if (n > 2) {
    const std::size_t m = n - 2;  // unknown interior second derivatives
    std::vector<double> diag(m), upper(m), rhs(m);
    for (std::size_t i = 0; i < m; ++i) {
      diag[i] = 2.0 * (h[i] + h[i + 1]);
      upper[i] = h[i + 1];
      rhs[i] = 6.0 * ((y_[i + 2] - y_[i + 1]) / h[i + 1] - (y_[i + 1] - y_[i]) / h[i]);
    }
    for (std::size_t i = 1; i < m; ++i) {
      const double w = h[i] / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    sigma[m] = rhs[m - 1] / diag[m - 1];
    for (std::size_t i = m - 1; i >= 1; --i) {
      sigma[i] = (rhs[i - 1] - upper[i - 1] * sigma[i + 1]) / diag[i - 1];
    }
  }

  b_.resize(n - 1);
  c_.resize(n - 1);
  d_.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    b_[i] = (y_[i + 1] - y_[i]) / h[i] - h[i] * (2.0 * sigma[i] + sigma[i + 1]) / 6.0;
    c_[i] = sigma[i] / 2.0;
    d_[i] = (sigma[i + 1] - sigma[i]) / (6.0 * h[i]);
  }
}

std::size_t CubicSpline1D::segment(double t) const {
  const auto it = std::upper_bound(t_.begin(), t_.end(), t);
  const auto idx = static_cast<std::size_t>(std::distance(t_.begin(), it));
  if (idx == 0) return 0;
  return std::min(idx - 1, t_.size() - 2);
}

double CubicSpline1D::value(double t) const {
  if (t < t_.front()) {
    return y_.front() + b_.front() * (t - t_.front());
  }
  if (t > t_.back()) {
    const std::size_t i = t_.size() - 2;
    const double h = t_.back() - t_[i];
    const double end_slope = b_[i] + 2.0 * c_[i] * h + 3.0 * d_[i] * h * h;
    return y_.back() + end_slope * (t - t_.back());
  }
  const std::size_t i = segment(t);
  const double dt = t - t_[i];
  return y_[i] + dt * (b_[i] + dt * (c_[i] + dt * d_[i]));
}

double CubicSpline1D::derivative(double t) const {
  if (t < t_.front()) return b_.front();
  if (t > t_.back()) {
    const std::size_t i = t_.size() - 2;
    const double h = t_.back() - t_[i];
    return b_[i] + 2.0 * c_[i] * h + 3.0 * d_[i] * h * h;
  }
  const std::size_t i = segment(t);
  const double dt = t - t_[i];
  return b_[i] + dt * (2.0 * c_[i] + dt * 3.0 * d_[i]);
}

double CubicSpline1D::second_derivative(double t) const {
  if (t < t_.front() || t > t_.back()) return 0.0;
  const std::size_t i = segment(t);
  const double dt = t - t_[i];
  return 2.0 * c_[i] + 6.0 * d_[i] * dt;
}

double CubicSpline1D::third_derivative(double t) const {
  if (t < t_.front() || t > t_.back()) return 0.0;
  return 6.0 * d_[segment(t)];
}

namespace {

// Composite Simpson quadrature of f over [a, b] with an even interval count.
template <class F>
double simpson(F&& f, double a, double b, int intervals) {
  const double h = (b - a) / intervals;
  double acc = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) {
    acc += f(a + i * h) * ((i % 2 == 1) ? 4.0 : 2.0);
  }
  return acc * h / 3.0;
}

}  // namespace

PathSpline2D PathSpline2D::fit(std::span<const Vec2> points) {
  const std::size_t n = points.size();
  if (n < 3) {
    throw DegenerateInput("PathSpline2D: need at least three points");
  }
  std::vector<double> u(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const double d = distance(points[i], points[i - 1]);
    if (d <= 1e-12) {
      throw DegenerateInput("PathSpline2D: consecutive points must be distinct");
    }
    u[i] = u[i - 1] + d;
  }

  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = points[i].x;
    ys[i] = points[i].y;
  }

  // First pass over the chord-length parameter, then measure the true arc
  // length of that fit and re-fit over it so the parameter is arc length.
  CubicSpline1D cx(u, xs);
  CubicSpline1D cy(u, ys);
  std::vector<double> s(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const auto speed = [&](double t) {
      const Vec2 g{cx.derivative(t), cy.derivative(t)};
      return g.norm();
    };
    s[i] = s[i - 1] + simpson(speed, u[i - 1], u[i], 8);
  }

  PathSpline2D path;
  path.x_ = CubicSpline1D(s, xs);
  path.y_ = CubicSpline1D(s, std::move(ys));
  path.length_ = s.back();

  const ProjectionSettings defaults;
  const auto samples =
      std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(path.length_ / defaults.presample_step)) + 1);
  path.seed_s_.resize(samples);
  path.seed_p_.resize(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const double si = path.length_ * static_cast<double>(i) / static_cast<double>(samples - 1);
    path.seed_s_[i] = si;
    path.seed_p_[i] = path.position(si);
  }
  return path;
}

Vec2 PathSpline2D::position(double s) const { return {x_.value(s), y_.value(s)}; }

Vec2 PathSpline2D::tangent(double s) const { return {x_.derivative(s), y_.derivative(s)}; }

Vec2 PathSpline2D::left_normal(double s) const {
  const Vec2 t = tangent(s);
  const double n = t.norm();
  return {-t.y / n, t.x / n};
}

double PathSpline2D::heading(double s) const {
  const Vec2 t = tangent(s);
  return std::atan2(t.y, t.x);
}

double PathSpline2D::curvature(double s) const {
  if (!in_domain(s)) {
    throw std::domain_error("PathSpline2D::curvature: arc length outside [0, L]");
  }
  return x_.derivative(s) * y_.second_derivative(s) - x_.second_derivative(s) * y_.derivative(s);
}

double PathSpline2D::curvature_clamped(double s) const {
  return curvature(std::clamp(s, 0.0, length_));
}

double PathSpline2D::curvature_derivative_clamped(double s) const {
  const double sc = std::clamp(s, 0.0, length_);
  // d/ds (x'y'' - x''y') = x'y''' - x'''y'
  return x_.derivative(sc) * y_.third_derivative(sc) - x_.third_derivative(sc) * y_.derivative(sc);
}

FrenetPose PathSpline2D::project(const Vec2& point, double heading_in,
                                 const ProjectionSettings& settings) const {
  if (seed_s_.empty()) {
    throw NoProjection("PathSpline2D::project: empty path");
  }

  // Rank the cached samples by distance and keep the best few as Newton seeds.
  std::vector<std::size_t> order(seed_s_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto seed_count = std::min<std::size_t>(order.size(), static_cast<std::size_t>(settings.newton_seeds));
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(seed_count), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return (seed_p_[a] - point).squared_norm() < (seed_p_[b] - point).squared_norm();
                    });

  double best_s = seed_s_[order.front()];
  double best_d2 = (seed_p_[order.front()] - point).squared_norm();

  for (std::size_t k = 0; k < seed_count; ++k) {
    double s = seed_s_[order[k]];
    for (int it = 0; it < settings.newton_iterations; ++it) {
      const Vec2 g = position(s) - point;
      const Vec2 t{x_.derivative(s), y_.derivative(s)};
      const Vec2 a{x_.second_derivative(s), y_.second_derivative(s)};
      const double d1 = 2.0 * g.dot(t);
      const double d2 = 2.0 * (t.dot(t) + g.dot(a));
      if (std::abs(d2) < 1e-14) break;
      const double step = d1 / d2;
      s = std::clamp(s - step, 0.0, length_);
      if (std::abs(step) < settings.newton_tolerance) break;
    }
    const double dist2 = (position(s) - point).squared_norm();
    if (dist2 < best_d2) {
      best_d2 = dist2;
      best_s = s;
    }
  }

  if (best_d2 > settings.capture_radius * settings.capture_radius) {
    throw NoProjection("PathSpline2D::project: no curve point within capture radius");
  }

  FrenetPose pose;
  pose.s = best_s;
  pose.d = left_normal(best_s).dot(point - position(best_s));
  pose.heading_diff = wrap_angle(heading_in - heading(best_s));
  return pose;
}

std::pair<Vec2, double> PathSpline2D::to_cartesian(const FrenetPose& pose) const {
  const Vec2 p = position(pose.s) + left_normal(pose.s) * pose.d;
  return {p, wrap_angle(heading(pose.s) + pose.heading_diff)};
}

}  // namespace planner
