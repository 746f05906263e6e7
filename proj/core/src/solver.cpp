#include "aspal/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <utility>

namespace aspal {

namespace {

double slack(double a, double b, double c) {
  return 1e-13 * std::max({1.0, std::abs(a), std::abs(b), std::abs(c)});
}

struct TimeLimitSignal {};

void validate(const AspalConfig& cfg) {
  if (!(cfg.sigma > 0 && cfg.sigma < 0.5)) {
    throw std::invalid_argument("aspal: need sigma in (0, 1/2)");
  }
  if (!(cfg.chi > 0 && cfg.chi < 1)) {
    throw std::invalid_argument("aspal: need chi in (0, 1)");
  }
  if (!(cfg.beta > 1)) throw std::invalid_argument("aspal: need beta > 1");
  if (!(cfg.c1 > 0)) throw std::invalid_argument("aspal: need c1 > 0");
  if (!(cfg.mu_inner > 0 && cfg.mu_inner < 1)) {
    throw std::invalid_argument("aspal: need mu_inner in (0, 1)");
  }
  if (!(cfg.M0_initial >= 1)) {
    throw std::invalid_argument("aspal: need M0_initial >= 1");
  }
  double lambda0 = cfg.fixed_lambda.value_or(cfg.lambda_bar);
  if (!(lambda0 > 0)) {
    throw std::invalid_argument(
        "aspal: initial prox stepsize must be positive (set lambda_bar or "
        "fixed_lambda)");
  }
  if (cfg.max_outer_iters <= 0) {
    throw std::invalid_argument("aspal: need max_outer_iters > 0");
  }
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::TimeLimit: return "TimeLimit";
    case SolveStatus::IterLimit: return "IterLimit";
  }
  return "Unknown";
}

Subproblem build_subproblem(const Vector& z_prev, const Vector& p,
                            double lambda, double c,
                            const ProblemInstance& prob) {
  if (!(lambda > 0)) throw std::invalid_argument("build_subproblem: lambda <= 0");
  if (!(c > 0)) throw std::invalid_argument("build_subproblem: c <= 0");

  // The iterate snapshot is shared by the value/gradient closures; the
  // problem itself must outlive the subproblem.
  auto zp = std::make_shared<Vector>(z_prev);
  auto pp = std::make_shared<Vector>(p);
  const ProblemInstance* pr = &prob;

  Subproblem sub;
  if (const auto* aff = std::get_if<AffineConstraint>(&prob.constraint)) {
    const AffineConstraint* ac = aff;
    sub.psi_s.value = [zp, pp, lambda, c, pr, ac](const Vector& u) {
      Vector r = ac->map.apply(u) - ac->rhs;
      double al_sans_h =
          pr->f.value(u) + pp->dot(r) + 0.5 * c * r.squaredNorm();
      return lambda * al_sans_h + 0.5 * (u - *zp).squaredNorm();
    };
    sub.psi_s.gradient = [zp, pp, lambda, c, pr, ac](const Vector& u) -> Vector {
      Vector r = ac->map.apply(u) - ac->rhs;
      return lambda * (pr->f.gradient(u) + ac->map.adjoint(*pp + c * r)) +
             (u - *zp);
    };
  } else {
    const auto* sc = &std::get<SetConstraint>(prob.constraint);
    sub.psi_s.value = [zp, pp, lambda, c, pr, sc](const Vector& u) {
      Vector y = sc->map.apply(u) + *pp / c;
      Vector d = y - sc->project(y);
      double al_sans_h = pr->f.value(u) - pp->squaredNorm() / (2.0 * c) +
                         0.5 * c * d.squaredNorm();
      return lambda * al_sans_h + 0.5 * (u - *zp).squaredNorm();
    };
    sub.psi_s.gradient = [zp, pp, lambda, c, pr, sc](const Vector& u) -> Vector {
      Vector y = sc->map.apply(u) + *pp / c;
      Vector d = y - sc->project(y);
      return lambda * (pr->f.gradient(u) + c * sc->map.adjoint(d)) + (u - *zp);
    };
  }

  sub.psi_n.value = [lambda, pr](const Vector& u) {
    return lambda * pr->h.value(u);
  };
  sub.psi_n.prox = [lambda, pr](const Vector& v, double gamma) {
    return pr->h.prox(v, lambda * gamma);
  };
  if (prob.h.lipschitz) sub.psi_n.lipschitz = lambda * *prob.h.lipschitz;
  sub.psi_n.diameter = prob.h.diameter;
  return sub;
}

bool descent_check(const Vector& z_prev, const Vector& z, const Vector& u,
                   double lambda, double c, const Vector& p,
                   const ProblemInstance& prob) {
  double al_prev = lambda * eval_al(z_prev, p, c, prob);
  double al_new = lambda * eval_al(z, p, c, prob);
  double lhs = al_prev - (al_new + 0.5 * (z - z_prev).squaredNorm());
  double rhs = u.dot(z_prev - z);
  return lhs >= rhs - slack(al_prev, al_new, rhs);
}

double c_sigma(double sigma) {
  if (!(sigma > 0 && sigma < 0.5)) {
    throw std::invalid_argument("c_sigma: need sigma in (0, 1/2)");
  }
  double t = 1.0 - sigma;
  return 2.0 * t * t / (1.0 - 2.0 * sigma);
}

DeltaTest delta_k_test(double anchor_al, double al, double p_norm, double c,
                       double sum_lambda, double sum_lambda_w2, double sigma,
                       double rho_for_delta) {
  if (!(sum_lambda > 0)) {
    throw std::invalid_argument("delta_k_test: needs iterations past the anchor");
  }
  double Cs = c_sigma(sigma);
  double delta = (anchor_al - al - p_norm * p_norm / (2.0 * c)) / sum_lambda;
  double threshold =
      std::max(sum_lambda_w2 / (2.0 * Cs * sum_lambda),
               rho_for_delta * rho_for_delta / (2.0 * Cs));
  return DeltaTest{delta, threshold, delta <= threshold};
}

OuterStepInfo outer_step(AspalState& st, const ProblemInstance& prob,
                         const AspalConfig& cfg) {
  OuterStepInfo info;
  const Vector z_prev = st.z;
  const Vector p_prev = st.p;

  Vector z_new, u;
  for (;;) {
    Subproblem sub = build_subproblem(z_prev, p_prev, st.lambda, st.c, prob);
    AdapFistaConfig icfg;
    icfg.mu = cfg.mu_inner;
    icfg.L0 = std::max(1.0, st.M0);
    icfg.chi = cfg.chi;
    icfg.beta = cfg.beta;
    icfg.sigma = cfg.sigma;
    icfg.max_iters = cfg.inner_max_iters;
    icfg.tick = cfg.inner_tick;
    icfg.observer = cfg.inner_observer;

    AdapFistaResult r = adap_fista(sub.psi_s, sub.psi_n, z_prev, icfg);
    st.counters.acg_iters += r.iterations;
    st.counters.resolvents += r.resolvents;
    info.acg_iters += r.iterations;
    info.resolvents += r.resolvents;
    st.M0 = std::max(1.0, r.L_last);  // warm start for the next inner call

    if (r.success &&
        descent_check(z_prev, r.y, r.u, st.lambda, st.c, p_prev, prob)) {
      z_new = std::move(r.y);
      u = std::move(r.u);
      info.accepted_acg_iters = r.iterations;
      break;
    }
    if (cfg.fixed_lambda) {
      throw NumericError(
          "aspal: the fixed prox stepsize was rejected (inner failure or "
          "descent-check failure) and stepsize adaptation is disabled");
    }
    st.lambda *= 0.5;
    ++info.halvings;
    if (st.lambda < cfg.lambda_min) {
      throw NumericError(
          "aspal: prox stepsize underflow; oracles are likely inconsistent");
    }
  }

  info.u = u;
  info.w = (u + z_prev - z_new) / st.lambda;
  info.step_norm = (z_new - z_prev).norm();

  const LinearMap& A = constraint_map(prob.constraint);
  Vector Az = A.apply(z_new);
  Vector p_new;
  if (const auto* aff = std::get_if<AffineConstraint>(&prob.constraint)) {
    Vector r = Az - aff->rhs;
    info.feas_norm = r.norm();
    p_new = p_prev + st.c * r;
  } else {
    const auto& sc = std::get<SetConstraint>(prob.constraint);
    info.feas_norm = (Az - sc.project(Az)).norm();
    Vector y = Az + p_prev / st.c;
    p_new = p_prev + st.c * (Az - sc.project(y));
  }
  info.dp_norm = (p_new - p_prev).norm();

  st.z = std::move(z_new);
  st.p = std::move(p_new);
  info.al = eval_al(st.z, st.p, st.c, prob);
  info.al_prev_p = eval_al(st.z, p_prev, st.c, prob);
  ++st.counters.outer_iters;
  return info;
}

SolutionCertificate solve(const ProblemInstance& prob, const Tolerances& tol,
                          const AspalConfig& cfg_in) {
  validate(cfg_in);
  if (!(tol.rho_hat > 0 && tol.eta_hat > 0)) {
    throw std::invalid_argument("aspal: tolerances must be positive");
  }
  AspalConfig cfg = cfg_in;

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };
  if (std::isfinite(cfg.time_limit_s)) {
    double limit = cfg.time_limit_s;
    auto user_tick = cfg.inner_tick;
    cfg.inner_tick = [elapsed, limit, user_tick] {
      if (elapsed() > limit) throw TimeLimitSignal{};
      if (user_tick) user_tick();
    };
  }

  const LinearMap& A = constraint_map(prob.constraint);
  AspalState st;
  st.z = prob.z0;
  st.p = Vector::Zero(A.rows);
  st.lambda = cfg.fixed_lambda.value_or(cfg.lambda_bar);
  st.c = cfg.c1;
  st.M0 = std::max(1.0, cfg.M0_initial);

  double grad0 = prob.f.gradient(prob.z0).norm();
  double feas0 = constraint_violation(prob.constraint, A.apply(prob.z0)).norm();
  const double rho_den = cfg.absolute_residuals ? 1.0 : 1.0 + grad0;
  const double eta_den = cfg.absolute_residuals ? 1.0 : 1.0 + feas0;
  const double rho_for_delta = tol.rho_hat * rho_den;

  SolveStatus status = SolveStatus::IterLimit;
  bool have_step = false;
  Vector last_w;
  double last_rho = std::nan(""), last_eta = std::nan("");

  try {
    for (;;) {
      if (st.k > cfg.max_outer_iters) {
        status = SolveStatus::IterLimit;
        break;
      }
      if (elapsed() > cfg.time_limit_s) {
        status = SolveStatus::TimeLimit;
        break;
      }

      OuterStepInfo info = outer_step(st, prob, cfg);
      have_step = true;
      double w_norm = info.w.norm();
      last_w = info.w;
      last_rho = w_norm / rho_den;
      last_eta = info.feas_norm / eta_den;

      // Penalty-cycle bookkeeping: the anchor iteration opens the window and
      // contributes no terms; later iterations accumulate λ_i and λ_i‖w_i‖².
      if (st.k == st.k_hat) {
        st.anchor_al = info.al_prev_p;
        st.sum_lambda = 0.0;
        st.sum_lambda_w2 = 0.0;
      } else {
        st.sum_lambda += st.lambda;
        st.sum_lambda_w2 += st.lambda * w_norm * w_norm;
      }

      TraceRecord rec;
      rec.k = st.k;
      rec.lambda = st.lambda;
      rec.c = st.c;
      rec.w_norm = w_norm;
      rec.feas_norm = info.feas_norm;
      rec.acg_iters = info.acg_iters;
      rec.resolvents = info.resolvents;
      rec.accepted_acg_iters = info.accepted_acg_iters;
      rec.al = info.al;
      rec.al_prev_p = info.al_prev_p;
      rec.p_norm = st.p.norm();
      rec.dp_norm = info.dp_norm;
      rec.u_norm = info.u.norm();
      rec.step_norm = info.step_norm;
      rec.k_hat = st.k_hat;
      rec.anchor_al = st.anchor_al;
      rec.halvings = info.halvings;
      rec.rho_rel = last_rho;
      rec.eta_rel = last_eta;

      if (last_rho <= tol.rho_hat && last_eta <= tol.eta_hat) {
        status = SolveStatus::Converged;
        if (cfg.on_iteration) cfg.on_iteration(rec);
        break;
      }

      if (st.k >= st.k_hat + 1) {
        DeltaTest dt =
            delta_k_test(st.anchor_al, info.al, rec.p_norm, st.c,
                         st.sum_lambda, st.sum_lambda_w2, cfg.sigma,
                         rho_for_delta);
        rec.delta = dt.delta;
        rec.delta_threshold = dt.threshold;
        if (dt.fired) {
          st.c *= 2.0;
          ++st.cycle;
          st.k_hat = st.k + 1;
          rec.penalty_doubled = true;
        }
      }

      if (!cfg.fixed_lambda && cfg.stepsize_doubling.enabled &&
          info.halvings == 0 &&
          info.accepted_acg_iters <= cfg.stepsize_doubling.acg_iter_threshold &&
          st.lambda < cfg.lambda_max) {
        st.lambda = std::min(2.0 * st.lambda, cfg.lambda_max);
        rec.lambda_doubled = true;
      }

      if (cfg.on_iteration) cfg.on_iteration(rec);
      ++st.k;
    }
  } catch (const TimeLimitSignal&) {
    status = SolveStatus::TimeLimit;
  }

  SolutionCertificate cert;
  cert.z = st.z;
  cert.p = st.p;
  cert.w = have_step ? last_w : Vector();
  cert.rho_rel = last_rho;
  cert.eta_rel = last_eta;
  cert.status = status;
  cert.counters = st.counters;
  cert.runtime_s = elapsed();
  return cert;
}

SolveRun solve_traced(const ProblemInstance& prob, const Tolerances& tol,
                      const AspalConfig& cfg_in, std::optional<double> m_f) {
  AspalConfig cfg = cfg_in;
  SolveRun run;

  TraceHeader& h = run.trace.header;
  h.rho_hat = tol.rho_hat;
  h.eta_hat = tol.eta_hat;
  h.sigma = cfg.sigma;
  h.chi = cfg.chi;
  h.beta = cfg.beta;
  h.lambda_bar = cfg.fixed_lambda.value_or(cfg.lambda_bar);
  h.c1 = cfg.c1;
  h.mu_inner = cfg.mu_inner;
  h.doubling_enabled = cfg.stepsize_doubling.enabled && !cfg.fixed_lambda;
  h.acg_iter_threshold = cfg.stepsize_doubling.acg_iter_threshold;
  h.fixed_lambda = cfg.fixed_lambda;
  h.absolute_residuals = cfg.absolute_residuals;
  h.affine = std::holds_alternative<AffineConstraint>(prob.constraint);
  h.m_f = m_f ? m_f : prob.f.weak_convexity;

  const LinearMap& A = constraint_map(prob.constraint);
  h.grad0_norm = prob.f.gradient(prob.z0).norm();
  h.feas0_norm = constraint_violation(prob.constraint, A.apply(prob.z0)).norm();
  h.rho_for_delta =
      cfg.absolute_residuals ? tol.rho_hat : tol.rho_hat * (1.0 + h.grad0_norm);

  auto user_cb = cfg.on_iteration;
  auto* records = &run.trace.records;
  cfg.on_iteration = [records, user_cb](const TraceRecord& rec) {
    records->push_back(rec);
    if (user_cb) user_cb(rec);
  };
  run.certificate = solve(prob, tol, cfg);
  return run;
}

double ratio_report(const std::vector<double>& a,
                    const std::vector<double>& r) {
  if (a.empty() || a.size() != r.size()) {
    throw std::invalid_argument(
        "ratio_report: inputs must be nonempty and of equal length");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(r[i] > 0)) {
      throw std::invalid_argument("ratio_report: denominators must be positive");
    }
    s += a[i] / r[i];
  }
  return s / static_cast<double>(a.size());
}

}  // namespace aspal
