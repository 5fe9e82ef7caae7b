#include "planner/qp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace planner {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Rotates the new constraint normal (expressed as d = J^T n) into the first
// iq + 1 coordinates, carrying J along, and appends the column to R. Returns
// false without committing when the normal is numerically dependent on the
// active set.
bool add_constraint(Eigen::MatrixXd& R, Eigen::MatrixXd& J, Eigen::VectorXd& d, int& iq,
                    double& R_norm) {
  const int n = static_cast<int>(J.rows());
  for (int j = n - 1; j >= iq + 1; --j) {
    double cc = d(j - 1);
    double ss = d(j);
    const double h = std::hypot(cc, ss);
    if (h == 0.0) continue;
    d(j) = 0.0;
    ss /= h;
    cc /= h;
    if (cc < 0.0) {
      cc = -cc;
      ss = -ss;
      d(j - 1) = -h;
    } else {
      d(j - 1) = h;
    }
    const double xny = ss / (1.0 + cc);
    for (int k = 0; k < n; ++k) {
      const double t1 = J(k, j - 1);
      const double t2 = J(k, j);
      J(k, j - 1) = t1 * cc + t2 * ss;
      J(k, j) = xny * (t1 + J(k, j - 1)) - t2;
    }
  }
  const double diag = std::abs(d(iq));
  const double norm = std::max(R_norm, diag);
  if (diag <= 1e-13 * norm) return false;
  ++iq;
  R.col(iq - 1).head(iq) = d.head(iq);
  R_norm = norm;
  return true;
}

// Drops active constraint l, shifting the R columns left and restoring the
// triangular shape with row rotations mirrored into J.
void delete_constraint(Eigen::MatrixXd& R, Eigen::MatrixXd& J, std::vector<int>& active,
                       Eigen::VectorXd& u, int& iq, int l) {
  const int n = static_cast<int>(J.rows());
  int qq = -1;
  for (int i = 0; i < iq; ++i) {
    if (active[static_cast<std::size_t>(i)] == l) {
      qq = i;
      break;
    }
  }
  for (int i = qq; i < iq - 1; ++i) {
    active[static_cast<std::size_t>(i)] = active[static_cast<std::size_t>(i + 1)];
    u(i) = u(i + 1);
    R.col(i) = R.col(i + 1);
  }
  active.pop_back();
  --iq;
  u(iq) = u(iq + 1);
  u(iq + 1) = 0.0;
  if (iq == 0) return;
  for (int j = qq; j < iq; ++j) {
    double cc = R(j, j);
    double ss = R(j + 1, j);
    const double h = std::hypot(cc, ss);
    if (h == 0.0) continue;
    cc /= h;
    ss /= h;
    R(j + 1, j) = 0.0;
    if (cc < 0.0) {
      R(j, j) = -h;
      cc = -cc;
      ss = -ss;
    } else {
      R(j, j) = h;
    }
    const double xny = ss / (1.0 + cc);
    for (int k = j + 1; k < iq; ++k) {
      const double t1 = R(j, k);
      const double t2 = R(j + 1, k);
      R(j, k) = t1 * cc + t2 * ss;
      R(j + 1, k) = xny * (t1 + R(j, k)) - t2;
    }
    for (int k = 0; k < n; ++k) {
      const double t1 = J(k, j);
      const double t2 = J(k, j + 1);
      J(k, j) = t1 * cc + t2 * ss;
      J(k, j + 1) = xny * (t1 + J(k, j)) - t2;
    }
  }
}

struct DualResult {
  Eigen::VectorXd x;
  Eigen::VectorXd mu;
  bool feasible = true;
  int changes = 0;
};

// Dual active-set iteration for min 0.5 x'Hx + g'x subject to A x >= b with H
// positive definite: start at the unconstrained minimum and add the most
// violated constraint at a time, taking dual steps to keep multipliers
// nonnegative.
DualResult solve_inequality_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                               const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  const int n = static_cast<int>(H.rows());
  const int m = static_cast<int>(A.rows());

  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("solve_qp: Hessian is not positive definite");
  }

  DualResult res;
  res.mu = Eigen::VectorXd::Zero(m);
  res.x = llt.solve(-g);
  if (m == 0) return res;

  Eigen::MatrixXd J = Eigen::MatrixXd::Identity(n, n);
  llt.matrixU().solveInPlace(J);
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
  double R_norm = 1.0;
  std::vector<int> active;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(m + 1);
  int iq = 0;

  Eigen::VectorXd x = res.x;
  Eigen::VectorXd d(n), z(n), r(n), np(n);

  const int max_pivots = 50 * (n + m) + 200;
  int pivots = 0;
  std::vector<char> is_active(static_cast<std::size_t>(m), 0);

  while (true) {
    // Most violated inactive constraint; none means optimality.
    int ip = -1;
    double smin = kInf;
    for (int i = 0; i < m; ++i) {
      if (is_active[static_cast<std::size_t>(i)]) continue;
      const double s = A.row(i).dot(x) - b(i);
      if (s < smin) {
        smin = s;
        ip = i;
      }
    }
    if (ip < 0 || smin >= -1e-10 * (1.0 + std::abs(b(ip)))) break;

    np = A.row(ip).transpose();
    double s_ip = smin;
    u(iq) = 0.0;

    while (true) {
      if (++pivots > max_pivots) {
        res.feasible = false;
        res.changes = pivots;
        res.x = x;
        return res;
      }
      d.noalias() = J.transpose() * np;
      z.setZero();
      for (int j = iq; j < n; ++j) z += J.col(j) * d(j);
      for (int i = iq - 1; i >= 0; --i) {
        double acc = d(i);
        for (int k = i + 1; k < iq; ++k) acc -= R(i, k) * r(k);
        r(i) = acc / R(i, i);
      }

      // Partial step: first active multiplier driven to zero.
      double t1 = kInf;
      int l = -1;
      for (int k = 0; k < iq; ++k) {
        if (r(k) > 0.0) {
          const double t = u(k) / r(k);
          if (t < t1) {
            t1 = t;
            l = active[static_cast<std::size_t>(k)];
          }
        }
      }
      // Full step: violated constraint reaches its bound.
      const double znp = z.dot(np);
      const double t2 = znp > 1e-13 ? -s_ip / znp : kInf;
      const double t = std::min(t1, t2);

      if (t >= kInf) {
        // Dual is unbounded, so the primal has no feasible point.
        res.feasible = false;
        res.changes = pivots;
        res.x = x;
        for (int k = 0; k < iq; ++k) res.mu(active[static_cast<std::size_t>(k)]) = u(k);
        return res;
      }

      if (t2 >= kInf) {
        // Pure dual step: drop the blocking constraint and retry.
        for (int k = 0; k < iq; ++k) u(k) -= t * r(k);
        u(iq) += t;
        is_active[static_cast<std::size_t>(l)] = 0;
        delete_constraint(R, J, active, u, iq, l);
        continue;
      }

      x += t * z;
      for (int k = 0; k < iq; ++k) u(k) -= t * r(k);
      u(iq) += t;

      if (t == t2) {
        if (add_constraint(R, J, d, iq, R_norm)) {
          active.push_back(ip);
          is_active[static_cast<std::size_t>(ip)] = 1;
        }
        // A dependent normal is left inactive; its slack is ~0 now, so the
        // outer scan will not pick it again.
        break;
      }

      // Partial step: drop the blocking constraint, keep chasing ip.
      is_active[static_cast<std::size_t>(l)] = 0;
      delete_constraint(R, J, active, u, iq, l);
      s_ip = A.row(ip).dot(x) - b(ip);
    }
  }

  res.x = x;
  for (int k = 0; k < iq; ++k) res.mu(active[static_cast<std::size_t>(k)]) = u(k);
  res.changes = pivots;
  return res;
}

}  // namespace

QpResult solve_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::MatrixXd& Ae,
                  const Eigen::VectorXd& be, const Eigen::MatrixXd& Ai,
                  const Eigen::VectorXd& bi) {
  const int n = static_cast<int>(H.rows());
  const int me = static_cast<int>(Ae.rows());
  const int mi = static_cast<int>(Ai.rows());
  if (H.cols() != n || g.size() != n || be.size() != me || bi.size() != mi ||
      (me > 0 && Ae.cols() != n) || (mi > 0 && Ai.cols() != n)) {
    throw std::invalid_argument("solve_qp: dimension mismatch");
  }
  if (me > n) {
    throw std::runtime_error("solve_qp: more equality constraints than variables");
  }

  QpResult out;
  out.eq_multipliers = Eigen::VectorXd::Zero(me);

  if (me == 0) {
    DualResult r = solve_inequality_qp(H, g, Ai, bi);
    out.x = r.x;
    out.ineq_multipliers = r.mu;
    out.feasible = r.feasible;
    out.active_set_changes = r.changes;
    return out;
  }

  // Eliminate the equalities: QR of Ae^T splits the space into the range of
  // the equality normals and its orthogonal complement Z.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Ae.transpose());
  Eigen::MatrixXd Q = qr.householderQ();
  Eigen::MatrixXd R1 =
      qr.matrixQR().topLeftCorner(me, me).triangularView<Eigen::Upper>();
  double diag_max = 0.0;
  for (int i = 0; i < me; ++i) diag_max = std::max(diag_max, std::abs(R1(i, i)));
  for (int i = 0; i < me; ++i) {
    if (std::abs(R1(i, i)) <= 1e-12 * std::max(1.0, diag_max)) {
      throw std::runtime_error("solve_qp: equality constraints are linearly dependent");
    }
  }

  const Eigen::VectorXd w = R1.transpose().triangularView<Eigen::Lower>().solve(be);
  const Eigen::VectorXd xp = Q.leftCols(me) * w;

  if (me == n) {
    out.x = xp;
    out.ineq_multipliers = Eigen::VectorXd::Zero(mi);
    if (mi > 0) {
      const Eigen::VectorXd slack = Ai * xp - bi;
      out.feasible = slack.minCoeff() >= -1e-8;
    }
    const Eigen::VectorXd rhs = H * xp + g;
    out.eq_multipliers =
        R1.triangularView<Eigen::Upper>().solve(Q.leftCols(me).transpose() * rhs);
    return out;
  }

  const Eigen::MatrixXd Z = Q.rightCols(n - me);
  Eigen::MatrixXd Hr = Z.transpose() * (H * Z).eval();
  Hr = (0.5 * (Hr + Hr.transpose())).eval();
  const Eigen::VectorXd gr = Z.transpose() * (g + H * xp);

  Eigen::MatrixXd Air(mi, n - me);
  Eigen::VectorXd bir(mi);
  if (mi > 0) {
    Air = Ai * Z;
    bir = bi - Ai * xp;
  }

  DualResult r = solve_inequality_qp(Hr, gr, Air, bir);
  out.x = xp + Z * r.x;
  out.ineq_multipliers = r.mu;
  out.feasible = r.feasible;
  out.active_set_changes = r.changes;

  Eigen::VectorXd rhs = H * out.x + g;
  if (mi > 0) rhs.noalias() -= Ai.transpose() * r.mu;
  out.eq_multipliers =
      R1.triangularView<Eigen::Upper>().solve(Q.leftCols(me).transpose() * rhs);
  return out;
}

}  // namespace planner
