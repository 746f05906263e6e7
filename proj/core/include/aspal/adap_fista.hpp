#pragma once

#include "aspal/problem.hpp"

namespace aspal {

// Per-iteration snapshot handed to the observer after the momentum update.
// Quantities satisfy τ_next = 1 + μ·A_next and τ_prev·A_next/a² = L − μ.
struct AdapFistaIterate {
  long j = 0;  // iteration index, 0-based
  double a = 0;
  double A_prev = 0, A_next = 0;
  double tau_prev = 0, tau_next = 0;
  double L = 0;      // curvature estimate accepted by the backtracking check
  long retries = 0;  // backtracking retries in this iteration
};

struct AdapFistaConfig {
  double mu = 0.25;    // strong-convexity modulus the recursion assumes
  double L0 = 1.0;     // initial curvature estimate, > mu
  double chi = 0.5005; // failure-test constant, in (0, 1)
  double beta = 1.25;  // backtracking factor, > 1
  double sigma = 0.1;  // relative stationarity target, in (0, 1)
  long max_iters = 1'000'000;  // safeguard; exhaustion raises SafeguardExhausted
  double L_cap = 1e18;         // curvature cap; beyond it the oracles lie
  // Called once every 256 iterations; a time-limit hook may throw through it.
  std::function<void()> tick{};
  std::function<void(const AdapFistaIterate&)> observer{};
};

struct AdapFistaResult {
  bool success = false;
  Vector y;  // last iterate; the certified solution on success
  Vector u;  // residual with ‖u‖ ≤ σ‖y − x0‖ on success
  double L_last = 0;
  long iterations = 0;  // main-loop passes
  long resolvents = 0;  // prox calls, backtracking retries included
};

// Root of (L−μ)a² − τa − τA = 0: a = (τ + √(τ² + 4τA(L−μ))) / (2(L−μ)).
// Requires L > μ, τ > 0, A ≥ 0.
double step_coefficient(double tau, double A, double L, double mu);

// y = argmin_u { ψ_s(x̃) + ⟨∇ψ_s(x̃), u−x̃⟩ + ψ_n(u) + (L/2)‖u−x̃‖² }
//   = prox_{ψ_n/L}(x̃ − ∇ψ_s(x̃)/L).  Exactly one resolvent call.
Vector composite_prox_step(const Vector& x_tilde, const Vector& grad_x_tilde,
                           double L, const ProxOracle& psi_n);
Vector composite_prox_step(const Vector& x_tilde, double L,
                           const SmoothOracle& psi_s, const ProxOracle& psi_n);

// Upper-curvature acceptance test of the backtracking loop:
//   ℓ_{ψ_s}(y; x̃) + ((1−χ)L/2)‖y−x̃‖² ≥ ψ_s(y),  ties accept.
bool curvature_ok(double psi_s_at_y, double psi_s_at_x, const Vector& grad_x,
                  const Vector& y, const Vector& x_tilde, double L, double chi);

// Doubles L (by β) until curvature_ok holds at the prox step taken from the
// fixed point x̃. Returns the accepted (y, L) and the number of prox calls.
struct BacktrackResult {
  Vector y;
  double L;
  long resolvents;
};
BacktrackResult lipschitz_backtrack(const Vector& x_tilde, double L_in,
                                    const SmoothOracle& psi_s,
                                    const ProxOracle& psi_n, double chi,
                                    double beta, double L_cap = 1e18);

// Momentum/average-point update (one iteration of the accelerated recursion).
struct MomentumUpdate {
  double A_next, tau_next;
  Vector x_next;
};
MomentumUpdate momentum_update(double A, double tau, const Vector& x,
                               const Vector& y_next, const Vector& x_tilde,
                               double mu, double L_next, double a);

// Key divergence test: true (continue) iff ‖y⁺−x0‖² ≥ χ·A⁺·L⁺·‖y⁺−x̃‖²,
// ties continue.
bool failure_test(const Vector& y_next, const Vector& x0, double A_next,
                  double L_next, const Vector& x_tilde, double chi);

// Inner stationarity certificate u = ∇ψ_s(y⁺) − ∇ψ_s(x̃) + L⁺(x̃ − y⁺);
// satisfies u ∈ ∇ψ_s(y⁺) + ∂ψ_n(y⁺) by construction of the prox step.
Vector residual(const Vector& y_next, const Vector& x_tilde,
                const Vector& grad_y_next, const Vector& grad_x_tilde,
                double L_next);

// Adaptive accelerated composite-gradient method for ψ_s + ψ_n with ψ_s
// μ-strongly convex (when the modulus assumption fails, the method detects it
// and reports failure instead of looping). Success returns (y, u) with
// ‖u‖ ≤ σ‖y − x0‖; failure returns the last iterate with success = false.
AdapFistaResult adap_fista(const SmoothOracle& psi_s, const ProxOracle& psi_n,
                           const Vector& x0, const AdapFistaConfig& cfg);

}  // namespace aspal
