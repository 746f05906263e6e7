#include "aspal/verify.hpp"

#include "aspal/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace aspal {

namespace {

// Accumulates the worst violation of one invariant across a whole run.
// `slack` ≤ 0 means the observation satisfied the invariant.
struct CheckAcc {
  CheckResult res;
  explicit CheckAcc(std::string name) { res.name = std::move(name); }
  void observe(double violation, long k) {
    if (violation > res.max_violation) {
      res.max_violation = violation;
      res.detail = "worst at k=" + std::to_string(k);
    }
    if (violation > 0) res.pass = false;
  }
  void fail(long k, const std::string& why) {
    res.pass = false;
    res.detail = "k=" + std::to_string(k) + ": " + why;
    res.max_violation = std::max(res.max_violation, 1.0);
  }
};

double rel_gap(double lhs, double rhs, double tol) {
  return std::abs(lhs - rhs) - tol * std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

void push(VerificationReport& report, CheckAcc&& acc) {
  report.pass = report.pass && acc.res.pass;
  report.checks.push_back(std::move(acc.res));
}

void push(VerificationReport& report, CheckResult res) {
  report.pass = report.pass && res.pass;
  report.checks.push_back(std::move(res));
}

}  // namespace

std::string format_report(const VerificationReport& report) {
  std::ostringstream os;
  for (const auto& c : report.checks) {
    os << (c.pass ? "[PASS] " : "[FAIL] ") << c.name;
    if (c.max_violation > 0) os << "  (violation " << c.max_violation << ")";
    if (!c.detail.empty()) os << "  " << c.detail;
    os << "\n";
  }
  os << (report.pass ? "VERIFIED" : "FAILED") << "\n";
  return os.str();
}

double check_inclusion(const Vector& z, const Vector& p, const Vector& w,
                       const ProblemInstance& prob, double gamma) {
  if (gamma <= 0) throw std::invalid_argument("gamma must be positive");
  const Vector v = w - prob.f.gradient(z) - constraint_map(prob.constraint).adjoint(p);
  const Vector zp = prob.h.prox(z + gamma * v, gamma);
  return (z - zp).norm() / (1 + z.norm());
}

VerificationReport verify_certificate(const SolutionCertificate& cert,
                                      const ProblemInstance& prob,
                                      const Tolerances& tol,
                                      double inclusion_tol) {
  VerificationReport report;
  const Index n = prob.z0.size();
  const Index l = constraint_map(prob.constraint).rows;
  if (cert.z.size() != n || cert.w.size() != n || cert.p.size() != l) {
    CheckResult c{"certificate_complete", false, 1.0,
                  "certificate vectors missing or mis-sized"};
    push(report, std::move(c));
    return report;
  }

  push(report, CheckResult{"status_converged",
                           cert.status == SolveStatus::Converged, 0.0,
                           to_string(cert.status)});

  report.inclusion_residual = check_inclusion(cert.z, cert.p, cert.w, prob);
  push(report, CheckResult{"kkt_inclusion",
                           report.inclusion_residual <= inclusion_tol,
                           std::max(0.0, report.inclusion_residual - inclusion_tol),
                           "residual " + std::to_string(report.inclusion_residual)});

  const Residuals res = stationarity_residuals(prob.z0, cert.z, cert.p, cert.w, prob);
  report.rho_rel = res.rho_rel;
  report.eta_rel = res.eta_rel;
  push(report, CheckResult{"stationarity", res.rho_rel <= tol.rho_hat,
                           std::max(0.0, res.rho_rel - tol.rho_hat),
                           "rho_rel " + std::to_string(res.rho_rel)});
  push(report, CheckResult{"feasibility", res.eta_rel <= tol.eta_hat,
                           std::max(0.0, res.eta_rel - tol.eta_hat),
                           "eta_rel " + std::to_string(res.eta_rel)});
  return report;
}

double finite_diff_grad_check(const SmoothOracle& f, const Vector& z,
                              double step, int n_dirs, std::uint64_t seed) {
  if (step <= 0) throw std::invalid_argument("step must be positive");
  if (n_dirs < 1) throw std::invalid_argument("need at least one direction");
  Rng rng(seed);
  const Vector g = f.gradient(z);
  double max_rel = 0;
  for (int t = 0; t < n_dirs; ++t) {
    Vector dir(z.size());
    for (Index i = 0; i < dir.size(); ++i) dir(i) = rng.gaussian();
    const double nrm = dir.norm();
    if (nrm == 0) continue;
    dir /= nrm;
    const double fd = (f.value(z + step * dir) - f.value(z - step * dir)) / (2 * step);
    const double an = g.dot(dir);
    max_rel = std::max(max_rel, std::abs(fd - an) / std::max(1.0, std::abs(an)));
  }
  return max_rel;
}

VerificationReport check_trace(const Trace& trace) {
  VerificationReport report;
  const TraceHeader& h = trace.header;
  if (trace.records.empty()) {
    push(report, CheckResult{"nonempty", false, 1.0, "trace has no iterations"});
    return report;
  }

  CheckAcc indexing("iteration_indexing");
  CheckAcc al_identity("al_difference_identity");
  CheckAcc feas_identity("feasibility_identity");
  CheckAcc inner_bound("inner_residual_bound");
  CheckAcc floor("stepsize_floor");
  CheckAcc no_halving_below("no_halving_below_threshold");
  CheckAcc ladder("penalty_ladder");
  CheckAcc cycles("cycle_discipline");
  CheckAcc delta_replay("delta_recompute");
  CheckAcc lambda_ladder("lambda_ladder");
  CheckAcc residuals("residual_normalization");

  const double lambda0 = h.fixed_lambda.value_or(h.lambda_bar);
  const bool check_floor =
      h.m_f.has_value() && !h.fixed_lambda.has_value() && !h.doubling_enabled;
  const double lambda_floor =
      h.m_f ? std::min(h.lambda_bar, 1.0 / (4 * *h.m_f)) : 0.0;
  const double halving_stop = h.m_f ? 1.0 / (2 * *h.m_f) : 0.0;

  double expected_c = h.c1;
  long expected_k_hat = 1;
  double anchor = std::nan("");
  double sum_lambda = 0, sum_lambda_w2 = 0;
  const TraceRecord* prev = nullptr;

  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const TraceRecord& rec = trace.records[i];
    const bool last = i + 1 == trace.records.size();

    if (rec.k != static_cast<long>(i) + 1) indexing.fail(rec.k, "k not sequential");

    // Penalty ladder and cycle bookkeeping are exact: doubling is the only
    // way c moves, so c_k must equal c1·2^(cycle) bit-for-bit.
    if (rec.c != expected_c) ladder.fail(rec.k, "c off the c1·2^l ladder");
    if (rec.k_hat != expected_k_hat) cycles.fail(rec.k, "k_hat mismatch");
    if (rec.penalty_doubled) {
      if (rec.k < rec.k_hat + 1) cycles.fail(rec.k, "cycle shorter than 2");
      expected_c *= 2;
      expected_k_hat = rec.k + 1;
    }

    // Prox stepsize ladder: λ_k = λ_start/2^halvings, λ_start from the
    // previous record (exact, except a doubling may be clipped by the cap).
    const double start = rec.lambda * std::exp2(static_cast<double>(rec.halvings));
    if (h.fixed_lambda) {
      if (rec.halvings != 0) lambda_ladder.fail(rec.k, "halved a fixed stepsize");
      lambda_ladder.observe(rel_gap(rec.lambda, *h.fixed_lambda, 1e-12), rec.k);
    } else if (!prev) {
      lambda_ladder.observe(rel_gap(start, lambda0, 1e-12), rec.k);
    } else if (!prev->lambda_doubled) {
      lambda_ladder.observe(rel_gap(start, prev->lambda, 1e-12), rec.k);
    } else if (start < prev->lambda * (1 - 1e-12) ||
               start > 2 * prev->lambda * (1 + 1e-12)) {
      lambda_ladder.fail(rec.k, "stepsize start outside doubling range");
    }

    if (check_floor)
      floor.observe(lambda_floor * (1 - 1e-12) - rec.lambda, rec.k);
    if (h.m_f && !h.fixed_lambda && prev && !prev->lambda_doubled &&
        prev->lambda <= halving_stop * (1 + 1e-12) && rec.halvings > 0)
      no_halving_below.fail(rec.k, "halved below 1/(2 m_f)");

    // Inner certificate: ‖u_k‖ ≤ σ‖z_k − z_{k−1}‖ is the accepted call's
    // success test restated with the outer iterates.
    inner_bound.observe(rec.u_norm - h.sigma * rec.step_norm -
                            1e-12 * std::max(1.0, rec.step_norm),
                        rec.k);

    if (h.affine) {
      // The identity subtracts two full AL evaluations, so its fp noise
      // scales with their magnitude, not with the (small) difference.
      const double al_scale =
          std::max({1.0, std::abs(rec.al), std::abs(rec.al_prev_p)});
      al_identity.observe(std::abs((rec.al - rec.al_prev_p) -
                                   rec.dp_norm * rec.dp_norm / rec.c) -
                              1e-9 * al_scale,
                          rec.k);
      feas_identity.observe(
          std::abs(rec.feas_norm - rec.dp_norm / rec.c) -
              1e-12 * std::max(1.0, rec.feas_norm),
          rec.k);
    }

    const double rho_den = h.absolute_residuals ? 1.0 : 1.0 + h.grad0_norm;
    const double eta_den = h.absolute_residuals ? 1.0 : 1.0 + h.feas0_norm;
    residuals.observe(rel_gap(rec.rho_rel, rec.w_norm / rho_den, 1e-12), rec.k);
    residuals.observe(rel_gap(rec.eta_rel, rec.feas_norm / eta_den, 1e-12), rec.k);

    // Δ_k replay: anchor and the λ/λ‖w‖² sums evolve exactly as in the
    // solver, so the recomputed test must agree with the log to 1e-12 and
    // the fired flag must match the doubling decision.
    if (rec.k == rec.k_hat) {
      anchor = rec.al_prev_p;
      sum_lambda = 0;
      sum_lambda_w2 = 0;
      if (std::isfinite(rec.delta)) delta_replay.fail(rec.k, "delta at cycle start");
    } else {
      sum_lambda += rec.lambda;
      sum_lambda_w2 += rec.lambda * rec.w_norm * rec.w_norm;
      if (std::isfinite(rec.delta)) {
        const DeltaTest dt =
            delta_k_test(anchor, rec.al, rec.p_norm, rec.c, sum_lambda,
                         sum_lambda_w2, h.sigma, h.rho_for_delta);
        delta_replay.observe(rel_gap(dt.delta, rec.delta, 1e-12), rec.k);
        delta_replay.observe(rel_gap(dt.threshold, rec.delta_threshold, 1e-12),
                             rec.k);
        if (dt.fired != rec.penalty_doubled)
          delta_replay.fail(rec.k, "doubling decision disagrees with replay");
      } else if (!last) {
        delta_replay.fail(rec.k, "missing delta mid-cycle");
      }
    }
    delta_replay.observe(rel_gap(rec.anchor_al, anchor, 1e-12), rec.k);

    prev = &rec;
  }

  report.rho_rel = trace.records.back().rho_rel;
  report.eta_rel = trace.records.back().eta_rel;

  push(report, std::move(indexing));
  if (h.affine) {
    push(report, std::move(al_identity));
    push(report, std::move(feas_identity));
  }
  push(report, std::move(inner_bound));
  if (check_floor) push(report, std::move(floor));
  if (h.m_f && !h.fixed_lambda) push(report, std::move(no_halving_below));
  push(report, std::move(ladder));
  push(report, std::move(cycles));
  push(report, std::move(delta_replay));
  push(report, std::move(lambda_ladder));
  push(report, std::move(residuals));
  return report;
}

}  // namespace aspal
