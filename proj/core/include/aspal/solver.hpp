#pragma once

#include "aspal/adap_fista.hpp"
#include "aspal/problem.hpp"
#include "aspal/trace.hpp"

#include <limits>
#include <vector>

namespace aspal {

// Heuristic from the solver's step 5: double λ after an iteration that needed
// no halving and whose accepted inner call stayed at or under the threshold.
struct StepsizeDoubling {
  bool enabled = true;
  long acg_iter_threshold = 75;
};

struct AspalConfig {
  double sigma = 0.1;
  double chi = 0.5005;
  double beta = 1.25;
  double lambda_bar = 0;  // initial prox stepsize; required unless fixed_lambda
  double c1 = 1.0;        // initial penalty
  double mu_inner = 0.25; // strong-convexity modulus handed to the inner solver
  double M0_initial = 100.0;  // initial inner curvature estimate, ≥ 1
  StepsizeDoubling stepsize_doubling{};
  std::optional<double> fixed_lambda{};  // disables λ adaptation entirely
  double time_limit_s = std::numeric_limits<double>::infinity();
  long max_outer_iters = 1'000'000;
  bool absolute_residuals = false;  // step-3 check on ‖w‖, ‖Az−b‖ directly
  double lambda_max = 1e12;   // doubling cap
  double lambda_min = 1e-18;  // halving underflow guard → NumericError
  long inner_max_iters = 1'000'000;
  std::function<void(const TraceRecord&)> on_iteration{};
  std::function<void(const AdapFistaIterate&)> inner_observer{};
  std::function<void()> inner_tick{};  // forwarded to the inner solver
};

enum class SolveStatus { Converged, TimeLimit, IterLimit };
const char* to_string(SolveStatus s);

struct SolveCounters {
  long outer_iters = 0;
  long acg_iters = 0;
  long resolvents = 0;
};

struct SolutionCertificate {
  Vector z, p, w;
  double rho_rel = std::nan("");
  double eta_rel = std::nan("");
  SolveStatus status = SolveStatus::Converged;
  SolveCounters counters{};
  double runtime_s = 0;
};

// Penalty-cycle bookkeeping and loop state; outer_step advances the iterate
// part, solve() owns the cycle/Δ bookkeeping.
struct AspalState {
  Vector z, p;
  double lambda = 0;
  double c = 0;
  double M0 = 1;  // inner warm start: last inner curvature estimate, ≥ 1
  long k = 1;
  long k_hat = 1;
  long cycle = 1;  // c = 2^(cycle-1) · c1
  double anchor_al = std::nan("");       // L_c(z_k̂, p_k̂−1)
  double sum_lambda = 0;                 // Σ λ_i, i ∈ [k̂+1, k]
  double sum_lambda_w2 = 0;              // Σ λ_i ‖w_i‖²
  SolveCounters counters{};
};

// Prox subproblem of one outer iteration:
//   ψ_s = λ[L_c(·, p) − h] + ½‖· − z_prev‖²,   ψ_n = λh,
// with ψ_n.prox(v, γ) = h.prox(v, λγ). For set-membership constraints the
// smooth penalty gradient is c·A*(y − Π_S(y)) at y = Au + p/c.
struct Subproblem {
  SmoothOracle psi_s;
  ProxOracle psi_n;
};
Subproblem build_subproblem(const Vector& z_prev, const Vector& p,
                            double lambda, double c,
                            const ProblemInstance& prob);

// Prox-descent acceptance:
//   λL_c(z_prev, p) − [λL_c(z, p) + ½‖z − z_prev‖²] ≥ ⟨u, z_prev − z⟩,
// ties accept (a tiny relative slack absorbs round-off at convergence).
bool descent_check(const Vector& z_prev, const Vector& z, const Vector& u,
                   double lambda, double c, const Vector& p,
                   const ProblemInstance& prob);

double c_sigma(double sigma);  // 2(1−σ)²/(1−2σ), σ ∈ (0, 1/2)

// Averaged-decrease test that drives penalty doubling.
struct DeltaTest {
  double delta;
  double threshold;
  bool fired;
};
DeltaTest delta_k_test(double anchor_al, double al, double p_norm, double c,
                       double sum_lambda, double sum_lambda_w2, double sigma,
                       double rho_for_delta);

// Everything one accepted outer iteration produces beyond the state update.
struct OuterStepInfo {
  Vector u, w;
  double feas_norm = 0, dp_norm = 0, step_norm = 0;
  double al = 0, al_prev_p = 0;
  long halvings = 0;
  long acg_iters = 0, resolvents = 0;  // spent on this step, failures included
  long accepted_acg_iters = 0;         // iterations of the accepted call
};

// One accepted iteration: {build_subproblem, inner solve, descent_check} with
// λ halving until acceptance, then w_k and the full dual update. Mutates
// (z, p, λ, M0, counters); cycle bookkeeping is solve()'s.
OuterStepInfo outer_step(AspalState& state, const ProblemInstance& prob,
                         const AspalConfig& cfg);

// Adaptive-stepsize proximal augmented Lagrangian loop.
SolutionCertificate solve(const ProblemInstance& prob, const Tolerances& tol,
                          const AspalConfig& cfg);

// solve() plus a fully populated trace (header + one record per iteration),
// for files and for invariant replay. m_f, when known, is recorded so the
// checker can assert the stepsize floor.
struct SolveRun {
  SolutionCertificate certificate;
  Trace trace;
};
SolveRun solve_traced(const ProblemInstance& prob, const Tolerances& tol,
                      const AspalConfig& cfg,
                      std::optional<double> m_f = std::nullopt);

// Mean ratio Σ(a_i/r_i)/N of paired positive metrics; rejects empty or
// mismatched inputs.
double ratio_report(const std::vector<double>& a, const std::vector<double>& r);

}  // namespace aspal
