#include <aspal/adap_fista.hpp>
#include <aspal/bench.hpp>
#include <aspal/generators.hpp>
#include <aspal/linalg.hpp>
#include <aspal/problem.hpp>
#include <aspal/prox.hpp>
#include <aspal/rng.hpp>
#include <aspal/solver.hpp>
#include <aspal/trace.hpp>
#include <aspal/verify.hpp>

#include <Eigen/LU>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "support/builders.hpp"
#include "support/oracles.hpp"

// Release gate: each numbered criterion prints exactly one [PASS]/[FAIL] line;
// the process exits nonzero when any criterion fails.
namespace {

using namespace aspal;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// ---------------------------------------------------------------------------
// Shared inner-iteration identity collection (criterion 3).

struct IdentityStats {
  double max_tau_err = 0;   // relative error of τ = 1 + μA, both ends
  double max_rate_err = 0;  // relative error of τ_j·A_{j+1}/a_j² = L_{j+1} − μ
  bool L_monotone = true;
  long iterates = 0;
};

std::function<void(const AdapFistaIterate&)> identity_observer(
    IdentityStats* st, double mu, std::shared_ptr<double> last_L) {
  return [st, mu, last_L](const AdapFistaIterate& it) {
    if (it.j == 0) *last_L = 0.0;
    if (it.L < *last_L) st->L_monotone = false;
    *last_L = it.L;

    const double tau_next_err = std::abs(it.tau_next - (1.0 + mu * it.A_next)) /
                                std::max(1.0, std::abs(it.tau_next));
    const double tau_prev_err = std::abs(it.tau_prev - (1.0 + mu * it.A_prev)) /
                                std::max(1.0, std::abs(it.tau_prev));
    st->max_tau_err =
        std::max({st->max_tau_err, tau_next_err, tau_prev_err});

    const double rate = it.tau_prev * it.A_next / (it.a * it.a);
    const double rate_err =
        std::abs(rate - (it.L - mu)) / std::max(1.0, std::abs(it.L - mu));
    st->max_rate_err = std::max(st->max_rate_err, rate_err);
    ++st->iterates;
  };
}

// ---------------------------------------------------------------------------
// Direct KKT solves for criterion 1: the active set comes from an independent
// plain proximal-gradient run, the solution from one exact linear KKT solve,
// verified against the sign conditions (fallback to the iterative point).

Vector kkt_simplex_direct(const Matrix& H, const Vector& g,
                          const Vector& approx) {
  const Index n = H.rows();
  std::vector<Index> support;
  std::vector<char> on(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i)
    if (approx(i) > 1e-8) {
      support.push_back(i);
      on[static_cast<std::size_t>(i)] = 1;
    }
  if (support.empty()) return approx;
  const Index m = static_cast<Index>(support.size());

  Matrix K = Matrix::Zero(m + 1, m + 1);
  Vector rhs(m + 1);
  for (Index r = 0; r < m; ++r) {
    for (Index c = 0; c < m; ++c) K(r, c) = H(support[r], support[c]);
    K(r, m) = -1.0;  // −ν column of ∇(½xᵀHx + gᵀx − ν(eᵀx − 1))
    K(m, r) = 1.0;
    rhs(r) = -g(support[r]);
  }
  rhs(m) = 1.0;
  const Vector sol = K.fullPivLu().solve(rhs);

  Vector x = Vector::Zero(n);
  for (Index r = 0; r < m; ++r) x(support[r]) = sol(r);
  const double nu = sol(m);
  const Vector grad = H * x + g;
  for (Index r = 0; r < m; ++r)
    if (x(support[r]) < -1e-10) return approx;
  for (Index i = 0; i < n; ++i)
    if (!on[static_cast<std::size_t>(i)] && grad(i) - nu < -1e-10)
      return approx;
  return x;
}

Vector kkt_box_direct(const Matrix& H, const Vector& g, double lo, double hi,
                      const Vector& approx) {
  const Index n = H.rows();
  Vector x = approx;
  std::vector<Index> free_set;
  std::vector<char> at_lo(static_cast<std::size_t>(n), 0);
  std::vector<char> at_hi(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i) {
    if (approx(i) < lo + 1e-8) {
      x(i) = lo;
      at_lo[static_cast<std::size_t>(i)] = 1;
    } else if (approx(i) > hi - 1e-8) {
      x(i) = hi;
      at_hi[static_cast<std::size_t>(i)] = 1;
    } else {
      free_set.push_back(i);
    }
  }
  if (!free_set.empty()) {
    const Index m = static_cast<Index>(free_set.size());
    Matrix Hff(m, m);
    Vector rhs(m);
    for (Index r = 0; r < m; ++r) {
      double fixed_part = 0;
      for (Index j = 0; j < n; ++j) {
        if (at_lo[static_cast<std::size_t>(j)] ||
            at_hi[static_cast<std::size_t>(j)])
          fixed_part += H(free_set[r], j) * x(j);
      }
      for (Index c = 0; c < m; ++c) Hff(r, c) = H(free_set[r], free_set[c]);
      rhs(r) = -g(free_set[r]) - fixed_part;
    }
    const Vector sol = Hff.fullPivLu().solve(rhs);
    for (Index r = 0; r < m; ++r) x(free_set[r]) = sol(r);
  }
  const Vector grad = H * x + g;
  for (Index i = 0; i < n; ++i) {
    if (at_lo[static_cast<std::size_t>(i)] && grad(i) < -1e-10) return approx;
    if (at_hi[static_cast<std::size_t>(i)] && grad(i) > 1e-10) return approx;
    if (!at_lo[static_cast<std::size_t>(i)] &&
        !at_hi[static_cast<std::size_t>(i)] &&
        (x(i) < lo - 1e-10 || x(i) > hi + 1e-10))
      return approx;
  }
  return x;
}

// ---------------------------------------------------------------------------
// Criteria 1–3 data: 50 strongly convex composite instances.

struct InnerSuite {
  int runs = 0, successes = 0;
  bool residual_bound = true;  // ‖u‖ ≤ σ‖y − x0‖, the exact termination test
  double max_kkt_dist = 0;
  double max_membership = 0;
  double seconds = 0;
  IdentityStats identity;
};

InnerSuite run_inner_suite() {
  InnerSuite s;
  auto last_L = std::make_shared<double>(0.0);
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 50; ++i) {
    const Index n = 5 + (i % 46);
    Rng rng(1000 + static_cast<std::uint64_t>(i));
    const Matrix H = testing::random_sym(n, 1.05, 8.0, rng);
    const Vector g = testing::random_vector(n, rng);
    const SmoothOracle psi_s = testing::make_quadratic(H, g);
    const bool simplex = (i % 2) == 0;
    const double lo = -1.0, hi = 2.0;
    const ProxOracle psi_n =
        simplex ? make_simplex_prox(n) : make_box_prox(n, lo, hi);
    const Vector x0 =
        simplex ? Vector(Vector::Constant(n, 1.0 / static_cast<double>(n)))
                : Vector(Vector::Zero(n));

    AdapFistaConfig cfg;
    cfg.mu = 1.0;  // eigenvalues of H lie in [1.05, 8]
    cfg.L0 = 2.0;
    cfg.sigma = 1e-8;  // tight, so y is comparable against the KKT point
    cfg.observer = identity_observer(&s.identity, cfg.mu, last_L);

    const AdapFistaResult res = adap_fista(psi_s, psi_n, x0, cfg);
    ++s.runs;
    if (!res.success) continue;
    ++s.successes;
    if (res.u.norm() > cfg.sigma * (res.y - x0).norm())
      s.residual_bound = false;

    const Vector approx = testing::prox_gradient_min(H, g, psi_n, x0, 1e-12);
    const Vector direct = simplex ? kkt_simplex_direct(H, g, approx)
                                  : kkt_box_direct(H, g, lo, hi, approx);
    s.max_kkt_dist = std::max(s.max_kkt_dist, (res.y - direct).norm());

    const Vector v = res.u - psi_s.gradient(res.y);
    const Vector back = psi_n.prox(res.y + v, 1.0);
    s.max_membership = std::max(
        s.max_membership, (res.y - back).norm() / (1.0 + res.y.norm()));
  }
  s.seconds = seconds_since(t0);
  return s;
}

// ---------------------------------------------------------------------------
// Criterion 4: AL-difference and feasibility identities on 20 affine runs.

bool run_outer_identities(IdentityStats* inner_identity) {
  bool all = true;
  for (int j = 0; j < 20; ++j) {
    GenSpec spec;
    spec.family = j < 10 ? Family::QpSimplex : Family::QpBox;
    spec.n = 40;
    spec.l = 6;
    spec.m_f = 5.0;
    spec.L_f = 40.0;
    spec.r = 3.0;
    spec.seed = 400 + static_cast<std::uint64_t>(j);
    const GeneratedInstance inst = generate(spec);

    AspalConfig cfg = default_solver_config(spec);
    cfg.time_limit_s = 60.0;
    auto last_L = std::make_shared<double>(0.0);
    cfg.inner_observer =
        identity_observer(inner_identity, cfg.mu_inner, last_L);

    const SolveRun run =
        solve_traced(inst.problem, Tolerances{1e-4, 1e-4}, cfg, spec.m_f);
    bool al_ok = false, feas_ok = false;
    for (const CheckResult& c : check_trace(run.trace).checks) {
      if (c.name == "al_difference_identity") al_ok = c.pass;
      if (c.name == "feasibility_identity") feas_ok = c.pass;
    }
    if (!al_ok || !feas_ok || run.trace.records.empty()) all = false;
  }
  return all;
}

// ---------------------------------------------------------------------------
// Criterion 5: stepsize floor with the doubling heuristic off.

bool run_stepsize_floor() {
  bool ok = true;
  long total_halvings = 0;
  for (int j = 0; j < 6; ++j) {
    GenSpec spec;
    spec.family = Family::QpSimplex;
    spec.n = 50;
    spec.l = 8;
    spec.m_f = 10.0;
    spec.L_f = 100.0;
    spec.seed = 500 + static_cast<std::uint64_t>(j);
    const GeneratedInstance inst = generate(spec);

    AspalConfig cfg = default_solver_config(spec);
    cfg.stepsize_doubling.enabled = false;
    cfg.time_limit_s = 120.0;
    const SolveRun run =
        solve_traced(inst.problem, Tolerances{1e-4, 1e-4}, cfg, spec.m_f);

    const double floor_lambda =
        std::min(cfg.lambda_bar, 1.0 / (4.0 * spec.m_f));
    bool below_half = false;
    for (const TraceRecord& rec : run.trace.records) {
      total_halvings += rec.halvings;
      if (rec.lambda < floor_lambda * (1.0 - 1e-12)) ok = false;
      if (below_half && rec.halvings > 0) ok = false;
      if (rec.lambda <= 1.0 / (2.0 * spec.m_f)) below_half = true;
    }

    bool floor_ok = false, no_halving_ok = false;
    for (const CheckResult& c : check_trace(run.trace).checks) {
      if (c.name == "stepsize_floor") floor_ok = c.pass;
      if (c.name == "no_halving_below_threshold") no_halving_ok = c.pass;
    }
    if (!floor_ok || !no_halving_ok) ok = false;
  }
  return ok && total_halvings > 0;  // the floor must actually be exercised
}

// ---------------------------------------------------------------------------
// Criterion 6: penalty ladder, cycle length, Δ-test agreement.

bool run_penalty_discipline() {
  bool ok = true;
  int doublings = 0;
  for (int j = 0; j < 4; ++j) {
    GenSpec spec;
    spec.family = Family::QpSimplex;
    spec.n = 40;
    spec.l = 6;
    spec.m_f = 10.0;
    spec.L_f = 100.0;
    spec.seed = 600 + static_cast<std::uint64_t>(j);
    const GeneratedInstance inst = generate(spec);

    AspalConfig cfg = default_solver_config(spec);
    cfg.c1 = 0.01;  // deliberately small so the ladder has to climb
    cfg.time_limit_s = 120.0;
    const SolveRun run =
        solve_traced(inst.problem, Tolerances{1e-4, 1e-4}, cfg, spec.m_f);

    double expected_c = cfg.c1;
    long cycle_start = 1;
    for (const TraceRecord& rec : run.trace.records) {
      if (rec.c != expected_c) ok = false;  // bit-exact 2^{l−1}·c1
      const bool fired =
          !std::isnan(rec.delta) && rec.delta <= rec.delta_threshold;
      if (fired != rec.penalty_doubled) ok = false;
      if (rec.penalty_doubled) {
        ++doublings;
        if (rec.k < cycle_start + 1) ok = false;  // cycles span ≥ 2 iterations
        expected_c *= 2.0;
        cycle_start = rec.k + 1;
      }
    }

    bool ladder_ok = false, cycle_ok = false, delta_ok = false;
    for (const CheckResult& c : check_trace(run.trace).checks) {
      if (c.name == "penalty_ladder") ladder_ok = c.pass;
      if (c.name == "cycle_discipline") cycle_ok = c.pass;
      if (c.name == "delta_recompute") delta_ok = c.pass;
    }
    if (!ladder_ok || !cycle_ok || !delta_ok) ok = false;
  }
  return ok && doublings >= 2;
}

// ---------------------------------------------------------------------------
// Criterion 7: all five families converge at desk scale.

bool run_end_to_end() {
  std::vector<GenSpec> specs(5);
  specs[0].family = Family::QpSimplex;
  specs[0].n = 100;
  specs[0].l = 10;
  specs[0].m_f = 10.0;
  specs[0].L_f = 100.0;
  specs[0].seed = 2024;

  specs[1].family = Family::QpBox;
  specs[1].n = 100;
  specs[1].l = 20;
  specs[1].r = 5.0;
  specs[1].m_f = 10.0;
  specs[1].L_f = 100.0;
  specs[1].seed = 2025;

  specs[2].family = Family::Qsdp;
  specs[2].n = 30;
  specs[2].l = 10;
  specs[2].density = 0.05;
  specs[2].m_f = 1.0;
  specs[2].L_f = 10.0;
  specs[2].seed = 2026;

  specs[3].family = Family::SparsePca;
  specs[3].n = 20;
  specs[3].k = 3;
  specs[3].s = 5;
  specs[3].vartheta = 100.0;
  specs[3].b_mcp = 0.008;
  specs[3].seed = 2027;

  specs[4].family = Family::Bmc;
  specs[4].n = 50;
  specs[4].l = 40;
  specs[4].ratings = synthetic_ratings(50, 40, 600, 12345);
  specs[4].upsilon = 0.5;
  specs[4].tau_m = 0.5;
  specs[4].theta = 1.0;
  specs[4].lo = 0.0;
  specs[4].hi = 5.0;

  bool ok = true;
  for (const GenSpec& spec : specs) {
    const GeneratedInstance inst = generate(spec);
    AspalConfig cfg = default_solver_config(spec);
    cfg.time_limit_s = 120.0;
    const SolutionCertificate cert =
        solve(inst.problem, Tolerances{1e-4, 1e-4}, cfg);
    const double incl =
        check_inclusion(cert.z, cert.p, cert.w, inst.problem);
    const bool this_ok = cert.status == SolveStatus::Converged &&
                         cert.runtime_s < 120.0 && incl <= 1e-8;
    std::printf("    %-10s %-9s %7.2f s  outer %4ld  acg %6ld  incl %.2e\n",
                family_name(spec.family), to_string(cert.status),
                cert.runtime_s, cert.counters.outer_iters,
                cert.counters.acg_iters, incl);
    std::fflush(stdout);
    if (!this_ok) ok = false;
  }
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 8: tighter tolerance must cost strictly more inner iterations.

bool run_accuracy_trend() {
  bool ok = true;
  for (int j = 0; j < 5; ++j) {
    GenSpec spec;
    spec.family = Family::QpSimplex;
    spec.n = 60;
    spec.l = 8;
    spec.m_f = 10.0;
    spec.L_f = 100.0;
    spec.seed = 300 + static_cast<std::uint64_t>(j);
    const GeneratedInstance inst = generate(spec);
    AspalConfig cfg = default_solver_config(spec);
    cfg.time_limit_s = 120.0;
    const SolutionCertificate coarse =
        solve(inst.problem, Tolerances{1e-4, 1e-4}, cfg);
    const SolutionCertificate fine =
        solve(inst.problem, Tolerances{1e-6, 1e-6}, cfg);
    if (coarse.status != SolveStatus::Converged ||
        fine.status != SolveStatus::Converged ||
        fine.counters.acg_iters <= coarse.counters.acg_iters)
      ok = false;
  }
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 9: projections vs brute-force oracles; spectral feasibility.

bool run_prox_equivalence() {
  bool ok = true;
  Rng rng(0x900d);
  for (int t = 0; t < 200; ++t) {
    const Index n = 1 + (t % 5);
    const Vector v = testing::random_vector(n, rng, -2.0, 2.0);
    const Vector diff =
        project_simplex(v) - testing::brute_simplex_projection(v);
    if (diff.lpNorm<Eigen::Infinity>() > 1e-8) ok = false;
  }
  for (int t = 0; t < 200; ++t) {
    const Index n = 2 + (t % 4);
    const double k =
        1.0 + static_cast<double>(rng.next_u64() % static_cast<std::uint64_t>(n));
    const Vector v = testing::random_vector(n, rng, -2.0, 3.0);
    const Vector diff = project_capped_simplex(v, k) -
                        testing::brute_capped_simplex_projection(v, k);
    if (diff.lpNorm<Eigen::Infinity>() > 1e-8) ok = false;
  }
  for (int t = 0; t < 50; ++t) {
    const Index n = 2 + (t % 5);
    Matrix M(n, n);
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < n; ++c) M(r, c) = rng.uniform(-2.0, 2.0);
    M = 0.5 * (M + M.transpose()).eval();
    const Matrix X = project_spectraplex(M);
    const SymEig eig = sym_eig(X);
    if (eig.eigenvalues.minCoeff() < -1e-8) ok = false;
    if (std::abs(X.trace() - 1.0) > 1e-8) ok = false;
  }
  for (int t = 0; t < 50; ++t) {
    const Index n = 3 + (t % 5);
    const double k = 1.0 + (t % 2);
    Matrix M(n, n);
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < n; ++c) M(r, c) = rng.uniform(-2.0, 2.0);
    M = 0.5 * (M + M.transpose()).eval();
    const Matrix X = project_fantope(M, k);
    const SymEig eig = sym_eig(X);
    if (eig.eigenvalues.minCoeff() < -1e-8) ok = false;
    if (eig.eigenvalues.maxCoeff() > 1.0 + 1e-8) ok = false;
    if (std::abs(X.trace() - k) > 1e-8) ok = false;
  }
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 10: CSV rows identical across runs, runtime column excluded.

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> masked_rows(const std::vector<BenchRecord>& rows) {
  std::vector<std::string> out;
  for (const BenchRecord& r : rows) {
    std::vector<std::string> fields = split(to_csv_row(r), ',');
    if (fields.size() == 14) fields[11] = "<runtime>";
    std::string joined;
    for (std::size_t i = 0; i < fields.size(); ++i)
      joined += (i ? "," : "") + fields[i];
    out.push_back(joined);
  }
  return out;
}

bool run_reproducibility() {
  BenchConfig config;
  config.solver_overrides = nlohmann::json::object();
  for (std::uint64_t seed : {11, 12}) {
    GenSpec spec;
    spec.family = Family::QpSimplex;
    spec.n = 30;
    spec.l = 5;
    spec.m_f = 5.0;
    spec.L_f = 40.0;
    spec.seed = seed;
    config.instances.push_back(spec);
  }
  config.tolerances = {Tolerances{1e-3, 1e-3}, Tolerances{1e-4, 1e-4}};
  config.time_limit_s = 60.0;

  const BenchOutput first = run_bench(config, 1, nullptr);
  const BenchOutput second = run_bench(config, 2, nullptr);
  return !first.rows.empty() &&
         masked_rows(first.rows) == masked_rows(second.rows);
}

}  // namespace

int main() {
  int failures = 0;
  const auto line = [&failures](int id, const char* label, bool pass,
                                const std::string& extra = "") {
    std::printf("[%s] criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", id,
                label, extra.empty() ? "" : " — ", extra.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  };
  const auto guarded = [](const std::function<bool()>& fn,
                          std::string* note) -> bool {
    try {
      return fn();
    } catch (const std::exception& e) {
      *note = std::string("exception: ") + e.what();
      return false;
    }
  };

  // Criteria 1–3 share the strongly convex inner-solver suite.
  InnerSuite inner;
  std::string note1;
  const bool ran_inner = guarded(
      [&inner] {
        inner = run_inner_suite();
        return true;
      },
      &note1);
  {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d/%d success, max|y-KKT| %.2e, %.2f s",
                  inner.successes, inner.runs, inner.max_kkt_dist,
                  inner.seconds);
    const bool pass = ran_inner && inner.successes == 50 &&
                      inner.residual_bound && inner.max_kkt_dist <= 1e-6 &&
                      inner.seconds < 5.0;
    line(1, "inner solver succeeds and matches direct KKT solves", pass,
         ran_inner ? std::string(buf) : note1);
  }
  {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "max membership residual %.2e",
                  inner.max_membership);
    line(2, "prox characterization of the inner certificate",
         ran_inner && inner.successes > 0 && inner.max_membership <= 1e-9,
         ran_inner ? std::string(buf) : note1);
  }

  std::string note4;
  const bool outer_ids = guarded(
      [&inner] { return run_outer_identities(&inner.identity); }, &note4);
  {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "%ld iterates, tau err %.2e, rate err %.2e",
                  inner.identity.iterates, inner.identity.max_tau_err,
                  inner.identity.max_rate_err);
    const bool pass = ran_inner && inner.identity.iterates > 0 &&
                      inner.identity.max_tau_err <= 1e-12 &&
                      inner.identity.max_rate_err <= 1e-12 &&
                      inner.identity.L_monotone;
    line(3, "inner recursion identities hold to 1e-12", pass, buf);
  }
  line(4, "augmented-Lagrangian and feasibility identities on 20 runs",
       outer_ids, note4);

  std::string note5;
  line(5, "stepsize floor with doubling disabled",
       guarded(run_stepsize_floor, &note5), note5);

  std::string note6;
  line(6, "penalty ladder, cycle length, and delta-test agreement",
       guarded(run_penalty_discipline, &note6), note6);

  std::string note7;
  line(7, "all five families converge at 1e-4 within 120 s",
       guarded(run_end_to_end, &note7), note7);

  std::string note8;
  line(8, "tighter tolerance costs strictly more inner iterations",
       guarded(run_accuracy_trend, &note8), note8);

  std::string note9;
  line(9, "projections match brute-force oracles and stay feasible",
       guarded(run_prox_equivalence, &note9), note9);

  std::string note10;
  line(10, "bench rows reproduce bit-for-bit modulo runtime",
       guarded(run_reproducibility, &note10), note10);

  return failures == 0 ? 0 : 1;
}
