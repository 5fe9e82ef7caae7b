#include "planner/ocp.hpp"

#include <cmath>
#include <stdexcept>

namespace planner {

ConstraintFamily row_family(int row) {
  switch (row % kRowsPerNode) {
    case 0:
      return ConstraintFamily::Progress;
    case 1:
    case 2:
      return ConstraintFamily::Lateral;
    case 3:
    case 4:
      return ConstraintFamily::Velocity;
    case 5:
    case 6:
      return ConstraintFamily::LateralAccel;
    default:
      return ConstraintFamily::Control;
  }
}

namespace {

// The node's constraint rows in c >= 0 form (positive = slack).
void node_rows(const Corridor& corridor, double zeta, const ConstraintMargins& m,
               const EgoState& x, const EgoControl& u, int k, double* c) {
  const ControlBounds& bounds = corridor.control_bounds();
  const double an = corridor.lateral_accel_limit() - m.lateral_accel;
  const double an_term = x.kappa * x.v * x.v;
  c[0] = (corridor.s_stop() - m.progress) - x.s;
  c[1] = x.d - corridor.d_lo(x.s, k, zeta) - m.lateral;
  c[2] = corridor.d_hi(x.s, k, zeta) - m.lateral - x.d;
  c[3] = x.v - m.velocity;
  c[4] = corridor.v_hi(x.s, zeta) - m.velocity - x.v;
  c[5] = an_term + an;
  c[6] = an - an_term;
  c[7] = u.u1 - bounds.u1_min;
  c[8] = bounds.u1_max - u.u1;
  c[9] = u.u2 - bounds.u2_min;
  c[10] = bounds.u2_max - u.u2;
}

}  // namespace

Eigen::VectorXd evaluate_constraints(const Eigen::VectorXd& z, const Corridor& corridor,
                                     double zeta, const ConstraintMargins& margins) {
  if (z.size() == 0 || z.size() % 7 != 0) {
    throw std::invalid_argument("evaluate_constraints: malformed trajectory vector");
  }
  const int nodes = static_cast<int>(z.size() / 7);
  Eigen::VectorXd out(kRowsPerNode * nodes);
  double c[kRowsPerNode];
  for (int k = 0; k < nodes; ++k) {
    node_rows(corridor, zeta, margins, OcpProblem::state_at(z, k), OcpProblem::control_at(z, k),
              k, c);
    for (int r = 0; r < kRowsPerNode; ++r) out(kRowsPerNode * k + r) = -c[r];
  }
  return out;
}

OcpProblem::OcpProblem(const Corridor& corridor, const EgoState& x0,
                       const ObjectiveWeights& weights, const ConstraintMargins& margins,
                       double zeta, const HorizonConfig& horizon, bool stop_mode)
    : corridor_(&corridor),
      x0_(x0),
      weights_(weights),
      margins_(stop_mode ? ConstraintMargins::zero() : margins),
      zeta_(stop_mode ? 1.0 : zeta),
      horizon_(horizon),
      stop_mode_(stop_mode) {
  if (horizon_.steps < 2) {
    throw std::invalid_argument("OcpProblem: horizon needs at least two steps");
  }
  if (zeta_ < 0.0 || zeta_ > 1.0) {
    throw std::invalid_argument("OcpProblem: zeta must lie in [0, 1]");
  }
  if (stop_mode_) {
    weights_.progress = 0.0;
  } else {
    weights_.speed = 0.0;
  }
  family_enabled_.fill(true);

  double c[kRowsPerNode];
  node_rows(*corridor_, zeta_, margins_, x0_, EgoControl{}, 0, c);
  for (int r = 0; r < 7; ++r) {
    if (c[r] < -1e-12) infeasible_start_ = true;
  }
}

double OcpProblem::objective(const Eigen::VectorXd& z) const {
  const int N = horizon_.steps;
  const double delta = horizon_.dt();
  double f = -weights_.progress * z(state_offset(N));
  for (int k = 0; k <= N; ++k) {
    const double w = (k == 0 || k == N) ? delta / 2.0 : delta;
    const EgoState x = state_at(z, k);
    const EgoControl u = control_at(z, k);
    f += w * (weights_.lateral * x.d * x.d + weights_.heading * x.chi * x.chi +
              weights_.curvature_rate * u.u1 * u.u1 + weights_.accel * u.u2 * u.u2 +
              weights_.speed * x.v * x.v);
  }
  return f;
}

Eigen::VectorXd OcpProblem::objective_gradient(const Eigen::VectorXd& z) const {
  const int N = horizon_.steps;
  const double delta = horizon_.dt();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(z.size());
  g(state_offset(N)) = -weights_.progress;
  for (int k = 0; k <= N; ++k) {
    const double w = (k == 0 || k == N) ? delta / 2.0 : delta;
    const int sx = state_offset(k);
    const int su = control_offset(k);
    g(sx + 1) += 2.0 * w * weights_.lateral * z(sx + 1);
    g(sx + 2) += 2.0 * w * weights_.heading * z(sx + 2);
    g(sx + 4) += 2.0 * w * weights_.speed * z(sx + 4);
    g(su) += 2.0 * w * weights_.curvature_rate * z(su);
    g(su + 1) += 2.0 * w * weights_.accel * z(su + 1);
  }
  return g;
}

Eigen::VectorXd OcpProblem::equalities(const Eigen::VectorXd& z) const {
  const int N = horizon_.steps;
  const double delta = horizon_.dt();
  const PathSpline2D& path = corridor_->path();
  Eigen::VectorXd ce(equality_count());

  const EgoState first = state_at(z, 0);
  ce(0) = first.s - x0_.s;
  ce(1) = first.d - x0_.d;
  ce(2) = first.chi - x0_.chi;
  ce(3) = first.kappa - x0_.kappa;
  ce(4) = first.v - x0_.v;

  EgoState xk = first;
  EgoState fk = ego_derivative(xk, control_at(z, 0), path.curvature_clamped(xk.s));
  for (int k = 0; k < N; ++k) {
    const EgoState xn = state_at(z, k + 1);
    const EgoState fn = ego_derivative(xn, control_at(z, k + 1), path.curvature_clamped(xn.s));
    const int row = 5 * (k + 1);
    ce(row + 0) = xn.s - xk.s - delta / 2.0 * (fk.s + fn.s);
    ce(row + 1) = xn.d - xk.d - delta / 2.0 * (fk.d + fn.d);
    ce(row + 2) = xn.chi - xk.chi - delta / 2.0 * (fk.chi + fn.chi);
    ce(row + 3) = xn.kappa - xk.kappa - delta / 2.0 * (fk.kappa + fn.kappa);
    ce(row + 4) = xn.v - xk.v - delta / 2.0 * (fk.v + fn.v);
    xk = xn;
    fk = fn;
  }
  return ce;
}

Eigen::MatrixXd OcpProblem::equality_jacobian(const Eigen::VectorXd& z) const {
  const int N = horizon_.steps;
  const double delta = horizon_.dt();
  const PathSpline2D& path = corridor_->path();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(equality_count(), variable_count());

  J.block<5, 5>(0, state_offset(0)).setIdentity();

  Eigen::Matrix<double, 5, 5> Ak = state_jacobian(path, state_at(z, 0));
  const Eigen::Matrix<double, 5, 5> I = Eigen::Matrix<double, 5, 5>::Identity();
  for (int k = 0; k < N; ++k) {
    const Eigen::Matrix<double, 5, 5> An = state_jacobian(path, state_at(z, k + 1));
    const int row = 5 * (k + 1);
    J.block<5, 5>(row, state_offset(k)) = -I - delta / 2.0 * Ak;
    J.block<5, 5>(row, state_offset(k + 1)) = I - delta / 2.0 * An;
    // Controls enter the dynamics only through kappa' = u1 and v' = u2.
    J(row + 3, control_offset(k)) = -delta / 2.0;
    J(row + 4, control_offset(k) + 1) = -delta / 2.0;
    J(row + 3, control_offset(k + 1)) = -delta / 2.0;
    J(row + 4, control_offset(k + 1) + 1) = -delta / 2.0;
    Ak = An;
  }
  return J;
}

Eigen::VectorXd OcpProblem::inequalities(const Eigen::VectorXd& z) const {
  const int N = horizon_.steps;
  Eigen::VectorXd ci(inequality_count());
  double c[kRowsPerNode];
  for (int k = 0; k <= N; ++k) {
    node_rows(*corridor_, zeta_, margins_, state_at(z, k), control_at(z, k), k, c);
    for (int r = 0; r < kRowsPerNode; ++r) ci(kRowsPerNode * k + r) = c[r];
  }
  return ci;
}

Eigen::MatrixXd OcpProblem::inequality_jacobian(const Eigen::VectorXd& z) const {
  const int N = horizon_.steps;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(inequality_count(), variable_count());
  for (int k = 0; k <= N; ++k) {
    const EgoState x = state_at(z, k);
    const int row = kRowsPerNode * k;
    const int sx = state_offset(k);
    const int su = control_offset(k);
    J(row + 0, sx + 0) = -1.0;
    J(row + 1, sx + 0) = -corridor_->d_lo_derivative(x.s, k, zeta_);
    J(row + 1, sx + 1) = 1.0;
    J(row + 2, sx + 0) = corridor_->d_hi_derivative(x.s, k, zeta_);
    J(row + 2, sx + 1) = -1.0;
    J(row + 3, sx + 4) = 1.0;
    J(row + 4, sx + 0) = corridor_->v_hi_derivative(x.s, zeta_);
    J(row + 4, sx + 4) = -1.0;
    J(row + 5, sx + 3) = x.v * x.v;
    J(row + 5, sx + 4) = 2.0 * x.kappa * x.v;
    J(row + 6, sx + 3) = -x.v * x.v;
    J(row + 6, sx + 4) = -2.0 * x.kappa * x.v;
    J(row + 7, su) = 1.0;
    J(row + 8, su) = -1.0;
    J(row + 9, su + 1) = 1.0;
    J(row + 10, su + 1) = -1.0;
  }
  return J;
}

bool OcpProblem::inequality_enforced(int row) const {
  const int family = static_cast<int>(row_family(row));
  if (!family_enabled_[static_cast<std::size_t>(family)]) return false;
  // Node 0 is pinned by the initial-condition equality; its pure state rows
  // cannot be improved by the subproblem and would poison feasibility
  // whenever the measured state sits inside a margin band.
  const int node = row / kRowsPerNode;
  const int r = row % kRowsPerNode;
  if (node == 0 && r < 7) return false;
  return true;
}

void OcpProblem::set_family_enabled(ConstraintFamily family, bool enabled) {
  family_enabled_[static_cast<std::size_t>(static_cast<int>(family))] = enabled;
}

Eigen::VectorXd OcpProblem::initial_guess() const {
  const int N = horizon_.steps;
  const double delta = horizon_.dt();
  std::vector<EgoState> states;
  states.reserve(static_cast<std::size_t>(N) + 1);
  states.push_back(x0_);
  for (int k = 0; k < N; ++k) {
    states.push_back(rk4_ego(states.back(), EgoControl{}, corridor_->path(), delta));
  }
  const std::vector<EgoControl> controls(static_cast<std::size_t>(N) + 1, EgoControl{});
  return pack(states, controls);
}

EgoState OcpProblem::state_at(const Eigen::VectorXd& z, int k) {
  const int o = state_offset(k);
  return {z(o), z(o + 1), z(o + 2), z(o + 3), z(o + 4)};
}

EgoControl OcpProblem::control_at(const Eigen::VectorXd& z, int k) {
  const int o = control_offset(k);
  return {z(o), z(o + 1)};
}

Eigen::VectorXd OcpProblem::pack(const std::vector<EgoState>& states,
                                 const std::vector<EgoControl>& controls) {
  if (states.size() != controls.size() || states.empty()) {
    throw std::invalid_argument("OcpProblem::pack: node count mismatch");
  }
  Eigen::VectorXd z(7 * static_cast<int>(states.size()));
  for (std::size_t k = 0; k < states.size(); ++k) {
    const int o = 7 * static_cast<int>(k);
    z(o) = states[k].s;
    z(o + 1) = states[k].d;
    z(o + 2) = states[k].chi;
    z(o + 3) = states[k].kappa;
    z(o + 4) = states[k].v;
    z(o + 5) = controls[k].u1;
    z(o + 6) = controls[k].u2;
  }
  return z;
}

void OcpProblem::unpack(const Eigen::VectorXd& z, std::vector<EgoState>& states,
                        std::vector<EgoControl>& controls) {
  if (z.size() % 7 != 0) {
    throw std::invalid_argument("OcpProblem::unpack: malformed trajectory vector");
  }
  const int nodes = static_cast<int>(z.size() / 7);
  states.resize(static_cast<std::size_t>(nodes));
  controls.resize(static_cast<std::size_t>(nodes));
  for (int k = 0; k < nodes; ++k) {
    states[static_cast<std::size_t>(k)] = state_at(z, k);
    controls[static_cast<std::size_t>(k)] = control_at(z, k);
  }
}

}  // namespace planner
