#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "planner/nlp.hpp"
#include "planner/qp.hpp"

namespace planner {

namespace {

struct Evaluation {
  double f = 0.0;
  Eigen::VectorXd grad;
  Eigen::VectorXd ce;
  Eigen::MatrixXd Ae;
  Eigen::VectorXd ci;
  Eigen::MatrixXd Ai;
};

Evaluation evaluate(const NlpProblem& p, const Eigen::VectorXd& z) {
  Evaluation ev;
  ev.f = p.objective(z);
  ev.grad = p.objective_gradient(z);
  ev.ce = p.equalities(z);
  ev.Ae = p.equality_jacobian(z);
  ev.ci = p.inequalities(z);
  ev.Ai = p.inequality_jacobian(z);
  return ev;
}

double violation_l1(const Eigen::VectorXd& ce, const Eigen::VectorXd& ci) {
  double v = ce.cwiseAbs().sum();
  for (int i = 0; i < ci.size(); ++i) v += std::max(0.0, -ci(i));
  return v;
}

double violation_inf(const Eigen::VectorXd& ce, const Eigen::VectorXd& ci) {
  double v = ce.size() > 0 ? ce.cwiseAbs().maxCoeff() : 0.0;
  for (int i = 0; i < ci.size(); ++i) v = std::max(v, -ci(i));
  return std::max(v, 0.0);
}

}  // namespace

NlpSolution solve_sqp(const NlpProblem& problem, const Eigen::VectorXd& initial_guess,
                      const SqpSettings& settings) {
  const int n = problem.variable_count();
  const int me = problem.equality_count();
  const int mi = problem.inequality_count();
  if (initial_guess.size() != n) {
    throw std::invalid_argument("solve_sqp: initial guess dimension mismatch");
  }

  std::vector<int> enforced;
  enforced.reserve(static_cast<std::size_t>(mi));
  for (int i = 0; i < mi; ++i) {
    if (problem.inequality_enforced(i)) enforced.push_back(i);
  }
  const int mi_enf = static_cast<int>(enforced.size());

  auto pick_rows = [&](const Eigen::VectorXd& full) {
    Eigen::VectorXd out(mi_enf);
    for (int i = 0; i < mi_enf; ++i) out(i) = full(enforced[static_cast<std::size_t>(i)]);
    return out;
  };
  auto pick_jacobian = [&](const Eigen::MatrixXd& full) {
    Eigen::MatrixXd out(mi_enf, n);
    for (int i = 0; i < mi_enf; ++i) out.row(i) = full.row(enforced[static_cast<std::size_t>(i)]);
    return out;
  };

  NlpSolution sol;
  sol.z = initial_guess;
  sol.eq_multipliers = Eigen::VectorXd::Zero(me);
  sol.ineq_multipliers = Eigen::VectorXd::Zero(mi);

  Evaluation ev = evaluate(problem, sol.z);
  Eigen::VectorXd ci_enf = pick_rows(ev.ci);

  double mu = 100.0;
  auto merit_of = [&](double f, const Eigen::VectorXd& ce, const Eigen::VectorXd& ci) {
    return f + mu * violation_l1(ce, ci);
  };
  sol.merit_history.push_back(merit_of(ev.f, ev.ce, ci_enf));

  bool restoration_failed = false;
  bool converged = false;

  // Damped quasi-Newton model of the Lagrangian, rebuilt per solve.
  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n);

  for (int iter = 1; iter <= settings.max_iterations; ++iter) {
    sol.iterations = iter;

    const Eigen::MatrixXd Ai_enf = pick_jacobian(ev.Ai);
    ci_enf = pick_rows(ev.ci);

    QpResult qp;
    bool relaxed_step = false;
    try {
      qp = solve_qp(B, ev.grad, ev.Ae, -ev.ce, Ai_enf, -ci_enf);
    } catch (const std::runtime_error&) {
      restoration_failed = true;
      break;
    }
    if (!qp.feasible) {
      // Restoration: ask only for a fraction of the linearized correction on
      // the violated rows, keeping satisfied rows satisfied.
      for (double tau : {0.9, 0.5, 0.1}) {
        Eigen::VectorXd bi(mi_enf);
        for (int i = 0; i < mi_enf; ++i) {
          bi(i) = ci_enf(i) < 0.0 ? tau * (-ci_enf(i)) : -ci_enf(i);
        }
        try {
          QpResult relaxed = solve_qp(B, ev.grad, ev.Ae, -tau * ev.ce, Ai_enf, bi);
          if (relaxed.feasible) {
            qp = relaxed;
            relaxed_step = true;
            break;
          }
        } catch (const std::runtime_error&) {
          break;
        }
      }
      if (!relaxed_step) {
        restoration_failed = true;
        break;
      }
    }

    const Eigen::VectorXd& p = qp.x;

    if (!relaxed_step) {
      // KKT test with the subproblem multipliers: stationarity residual is
      // exactly -Bp at a QP solution, and GI keeps complementarity exact for
      // the linearized rows, so test it on the nonlinear residuals.
      const double kkt = p.size() > 0 ? (B * p).cwiseAbs().maxCoeff() : 0.0;
      double comp = 0.0;
      for (int i = 0; i < mi_enf; ++i) {
        comp = std::max(comp, std::abs(qp.ineq_multipliers(i) * ci_enf(i)));
      }
      const double viol = violation_inf(ev.ce, ci_enf);
      if (viol <= settings.constraint_tolerance && kkt <= settings.kkt_tolerance &&
          comp <= 10.0 * settings.kkt_tolerance) {
        sol.eq_multipliers = qp.eq_multipliers;
        for (int i = 0; i < mi_enf; ++i) {
          sol.ineq_multipliers(enforced[static_cast<std::size_t>(i)]) = qp.ineq_multipliers(i);
        }
        converged = true;
        break;
      }
    }

    // Exact penalty weight must dominate the multipliers; raise it only.
    double lam_inf = 0.0;
    if (qp.eq_multipliers.size() > 0) lam_inf = qp.eq_multipliers.cwiseAbs().maxCoeff();
    if (qp.ineq_multipliers.size() > 0) {
      lam_inf = std::max(lam_inf, qp.ineq_multipliers.cwiseAbs().maxCoeff());
    }
    mu = std::max(mu, 1.1 * lam_inf + 1.0);

    const double phi0 = merit_of(ev.f, ev.ce, ci_enf);
    const double descent = ev.grad.dot(p) - mu * violation_l1(ev.ce, ci_enf);

    double alpha = 1.0;
    double best_alpha = -1.0;
    double best_phi = phi0;
    Evaluation best_ev;
    for (int ls = 0; ls < settings.max_line_search_steps; ++ls) {
      const Eigen::VectorXd trial = sol.z + alpha * p;
      Evaluation trial_ev = evaluate(problem, trial);
      const double phi = merit_of(trial_ev.f, trial_ev.ce, pick_rows(trial_ev.ci));
      if (phi <= phi0 + settings.armijo_coefficient * alpha * std::min(descent, 0.0)) {
        best_alpha = alpha;
        best_phi = phi;
        best_ev = std::move(trial_ev);
        break;
      }
      if (phi < best_phi) {
        best_alpha = alpha;
        best_phi = phi;
        best_ev = std::move(trial_ev);
      }
      alpha *= 0.5;
    }
    if (best_alpha < 0.0) break;  // no non-increasing step exists along p

    const Eigen::VectorXd step = best_alpha * p;
    const Eigen::VectorXd z_new = sol.z + step;

    // Quasi-Newton update on the Lagrangian gradient change, damped so the
    // model stays positive definite.
    Eigen::VectorXd grad_lag_old = ev.grad;
    Eigen::VectorXd grad_lag_new = best_ev.grad;
    if (me > 0) {
      grad_lag_old.noalias() -= ev.Ae.transpose() * qp.eq_multipliers;
      grad_lag_new.noalias() -= best_ev.Ae.transpose() * qp.eq_multipliers;
    }
    if (mi_enf > 0) {
      const Eigen::MatrixXd Ai_new = pick_jacobian(best_ev.Ai);
      grad_lag_old.noalias() -= Ai_enf.transpose() * qp.ineq_multipliers;
      grad_lag_new.noalias() -= Ai_new.transpose() * qp.ineq_multipliers;
    }
    const Eigen::VectorXd y_raw = grad_lag_new - grad_lag_old;
    const Eigen::VectorXd Bs = B * step;
    const double sBs = step.dot(Bs);
    double sy = step.dot(y_raw);
    Eigen::VectorXd y = y_raw;
    if (sBs > 1e-14) {
      if (sy < 0.2 * sBs) {
        const double theta = 0.8 * sBs / (sBs - sy);
        y = theta * y_raw + (1.0 - theta) * Bs;
        sy = step.dot(y);
      }
      if (sy > 1e-14) {
        B.noalias() -= (Bs * Bs.transpose()) / sBs;
        B.noalias() += (y * y.transpose()) / sy;
        B = (0.5 * (B + B.transpose())).eval();
      }
    }

    sol.z = z_new;
    ev = std::move(best_ev);
    sol.eq_multipliers = qp.eq_multipliers;
    sol.ineq_multipliers.setZero();
    for (int i = 0; i < mi_enf; ++i) {
      sol.ineq_multipliers(enforced[static_cast<std::size_t>(i)]) = qp.ineq_multipliers(i);
    }
    sol.merit_history.push_back(best_phi);
  }

  ci_enf = pick_rows(ev.ci);
  sol.objective = ev.f;
  sol.constraint_violation = violation_inf(ev.ce, ci_enf);
  sol.equality_values = ev.ce;
  sol.inequality_values = ev.ci;

  if (converged) {
    sol.status = SolveStatus::Converged;
  } else if (restoration_failed &&
             sol.constraint_violation >
                 settings.infeasibility_ratio * settings.constraint_tolerance) {
    sol.status = SolveStatus::Infeasible;
  } else {
    sol.status = SolveStatus::IterationLimit;
  }
  return sol;
}

}  // namespace planner
