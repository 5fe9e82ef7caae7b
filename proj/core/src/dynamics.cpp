#include "planner/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace planner {

EgoControl ControlBounds::clamp(const EgoControl& u) const {
  return {std::clamp(u.u1, u1_min, u1_max), std::clamp(u.u2, u2_min, u2_max)};
}

EgoState ego_derivative(const EgoState& x, const EgoControl& u, double kappa_r) {
  EgoState dx;
  dx.s = x.v;
  dx.d = x.v * x.chi;
  dx.chi = x.v * (x.kappa - kappa_r);
  dx.kappa = u.u1;
  dx.v = u.u2;
  return dx;
}

EgoState rk4_ego(const EgoState& x, const EgoControl& u, const PathSpline2D& path, double dt) {
  return rk4_step(
      x, [&](const EgoState& xi) { return ego_derivative(xi, u, path.curvature_clamped(xi.s)); },
      dt);
}

PlanarMotionState motion_derivative(const PlanarMotionState& x, const ObstacleMotionModel& model) {
  PlanarMotionState dx;
  const double v = std::max(x.v, 0.0);
  dx.x = v * std::cos(x.theta);
  dx.y = v * std::sin(x.theta);
  if (model.kind == ObstacleMotionModel::Kind::ConstantCurvatureAcceleration) {
    dx.theta = model.curvature * v;
    // A braking model holds at standstill instead of reversing.
    dx.v = (x.v <= 0.0 && model.accel < 0.0) ? 0.0 : model.accel;
  }
  return dx;
}

Eigen::Matrix<double, 5, 5> state_jacobian(const PathSpline2D& path, const EgoState& x) {
  Eigen::Matrix<double, 5, 5> A = Eigen::Matrix<double, 5, 5>::Zero();
  A(0, 4) = 1.0;
  A(1, 2) = x.v;
  A(1, 4) = x.chi;
  A(2, 0) = -x.v * path.curvature_derivative_clamped(x.s);
  A(2, 3) = x.v;
  A(2, 4) = x.kappa - path.curvature_clamped(x.s);
  return A;
}

std::vector<PlanarMotionState> predict_anchor(const ObstacleMotionModel& model,
                                              const PlanarMotionState& start, double dt,
                                              int steps) {
  std::vector<PlanarMotionState> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(start);
  for (int k = 0; k < steps; ++k) {
    PlanarMotionState next =
        rk4_step(out.back(), [&](const PlanarMotionState& xi) { return motion_derivative(xi, model); }, dt);
    next.v = std::max(next.v, 0.0);
    out.push_back(next);
  }
  return out;
}

}  // namespace planner
