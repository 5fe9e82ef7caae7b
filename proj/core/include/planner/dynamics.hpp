#pragma once

#include <Eigen/Dense>
#include <vector>

#include "planner/spline.hpp"

namespace planner {

// Vehicle state in road coordinates: arc length s, lateral offset d, heading
// difference chi to the road tangent, own path curvature kappa, speed v.
struct EgoState {
  double s = 0.0;
  double d = 0.0;
  double chi = 0.0;
  double kappa = 0.0;
  double v = 0.0;
};

// Controls: curvature rate u1 [1/(m s)] and longitudinal acceleration u2 [m/s^2].
struct EgoControl {
  double u1 = 0.0;
  double u2 = 0.0;
};

struct ControlBounds {
  double u1_min = -0.5;
  double u1_max = 0.5;
  double u2_min = -4.0;
  double u2_max = 2.0;

  EgoControl clamp(const EgoControl& u) const;
};

// Small-angle kinematics about the road: s' = v, d' = v chi,
// chi' = v (kappa - kappa_r(s)), kappa' = u1, v' = u2.
EgoState ego_derivative(const EgoState& x, const EgoControl& u, double kappa_r);

// One classic fourth-order Runge-Kutta step of x' = f(x).
template <class State, class F>
State rk4_step(const State& x, F&& f, double dt) {
  const State k1 = f(x);
  const State k2 = f(x + k1 * (dt / 2.0));
  const State k3 = f(x + k2 * (dt / 2.0));
  const State k4 = f(x + k3 * dt);
  return x + (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0);
}

inline EgoState operator+(const EgoState& a, const EgoState& b) {
  return {a.s + b.s, a.d + b.d, a.chi + b.chi, a.kappa + b.kappa, a.v + b.v};
}
inline EgoState operator*(const EgoState& a, double c) {
  return {a.s * c, a.d * c, a.chi * c, a.kappa * c, a.v * c};
}

// RK4 step of the vehicle model with the road curvature looked up along the
// way (clamped past the path ends, where the fitted path continues straight).
EgoState rk4_ego(const EgoState& x, const EgoControl& u, const PathSpline2D& path, double dt);

// Jacobian of ego_derivative with respect to the state, with the road
// curvature and its slope taken from the path at x.s.
Eigen::Matrix<double, 5, 5> state_jacobian(const PathSpline2D& path, const EgoState& x);

// Obstacle motion hypothesis. ConstantVelocity keeps heading and speed;
// ConstantCurvatureAcceleration follows a circular arc while accelerating,
// with the speed floored at zero (no reversing out of a braking model).
struct ObstacleMotionModel {
  enum class Kind { ConstantVelocity, ConstantCurvatureAcceleration };
  Kind kind = Kind::ConstantVelocity;
  double speed = 0.0;      // initial speed [m/s]
  double curvature = 0.0;  // [1/m], ignored for ConstantVelocity
  double accel = 0.0;      // [m/s^2], ignored for ConstantVelocity
};

// Pose plus speed of an obstacle anchor in whatever plane it is integrated in.
struct PlanarMotionState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;
};

inline PlanarMotionState operator+(const PlanarMotionState& a, const PlanarMotionState& b) {
  return {a.x + b.x, a.y + b.y, a.theta + b.theta, a.v + b.v};
}
inline PlanarMotionState operator*(const PlanarMotionState& a, double c) {
  return {a.x * c, a.y * c, a.theta * c, a.v * c};
}

PlanarMotionState motion_derivative(const PlanarMotionState& x, const ObstacleMotionModel& model);

// Integrates the anchor over `steps` RK4 steps of dt. Returns steps + 1
// entries, the initial state first. The speed never drops below zero.
std::vector<PlanarMotionState> predict_anchor(const ObstacleMotionModel& model,
                                              const PlanarMotionState& start, double dt, int steps);

}  // namespace planner
