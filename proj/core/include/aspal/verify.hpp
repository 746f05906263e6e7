#pragma once

#include "aspal/problem.hpp"
#include "aspal/solver.hpp"
#include "aspal/trace.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace aspal {

struct CheckResult {
  std::string name;
  bool pass = true;
  double max_violation = 0;
  std::string detail;
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  bool pass = true;
  double inclusion_residual = std::nan("");
  double rho_rel = std::nan("");
  double eta_rel = std::nan("");
};

std::string format_report(const VerificationReport& report);

// KKT inclusion via the prox characterization: with v = w − ∇f(z) − A*p,
// v ∈ ∂h(z) iff z = prox_h(z + γv, γ); returns ‖z − prox_h(z+γv, γ)‖/(1+‖z‖).
double check_inclusion(const Vector& z, const Vector& p, const Vector& w,
                       const ProblemInstance& prob, double gamma = 1.0);

// Certificate-level verification: inclusion residual plus recomputed
// stationarity/feasibility residuals checked against the tolerances.
VerificationReport verify_certificate(const SolutionCertificate& cert,
                                      const ProblemInstance& prob,
                                      const Tolerances& tol,
                                      double inclusion_tol = 1e-8);

// Central-difference directional-derivative check of ∇f along n_dirs seeded
// unit directions; returns the max relative error.
double finite_diff_grad_check(const SmoothOracle& f, const Vector& z,
                              double step, int n_dirs = 10,
                              std::uint64_t seed = 0x5eedULL);

// Replays a solver trace and re-derives every invariant the run claims:
// augmented-Lagrangian and feasibility identities (affine runs), certified
// inner residual bounds, stepsize floor (when m_f is known and doubling is
// off), penalty ladder c_k = 2^(l−1)c1, cycle lengths ≥ 2, and the Δ_k
// test recomputed from logged values (must match to 1e-12 and must agree
// with the logged doubling decisions). Consults nothing but the trace.
VerificationReport check_trace(const Trace& trace);

}  // namespace aspal
