#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace aspal {

// One record per accepted outer iteration. Everything the trace checker needs
// to replay the run's invariants is captured here as scalars; no solver
// internals are consulted at check time.
struct TraceRecord {
  long k = 0;            // outer iteration index, 1-based
  double lambda = 0;     // accepted prox stepsize λ_k
  double c = 0;          // penalty c_k
  double w_norm = 0;     // ‖w_k‖
  double feas_norm = 0;  // ‖Az_k − b‖, resp. ‖Az_k − Π_S(Az_k)‖
  long acg_iters = 0;    // inner iterations spent on this outer step
  long resolvents = 0;   // prox calls spent on this outer step
  long accepted_acg_iters = 0;  // iterations of the accepted inner call
  double al = 0;         // L_{c_k}(z_k, p_k)
  double al_prev_p = 0;  // L_{c_k}(z_k, p_{k-1})
  double p_norm = 0;     // ‖p_k‖
  double dp_norm = 0;    // ‖p_k − p_{k-1}‖
  double u_norm = 0;     // ‖u_k‖
  double step_norm = 0;  // ‖z_k − z_{k-1}‖
  long k_hat = 0;        // first iteration of the penalty cycle containing k
  double anchor_al = std::nan("");  // L_{c_k}(z_k̂, p_{k̂−1})
  double delta = std::nan("");      // Δ_k; NaN while k == k̂
  double delta_threshold = std::nan("");
  bool penalty_doubled = false;  // c_{k+1} = 2 c_k decided at this k
  long halvings = 0;             // λ halvings within this iteration
  bool lambda_doubled = false;   // stepsize-doubling heuristic fired at k
  double rho_rel = std::nan("");
  double eta_rel = std::nan("");
};

// Run-level constants the checker needs; first line of a trace file.
struct TraceHeader {
  double rho_hat = 0, eta_hat = 0;
  double rho_for_delta = 0;  // tolerance actually used in the Δ_k threshold
  double sigma = 0, chi = 0, beta = 0;
  double lambda_bar = 0, c1 = 0, mu_inner = 0;
  bool doubling_enabled = true;
  long acg_iter_threshold = 0;
  std::optional<double> fixed_lambda{};
  bool absolute_residuals = false;
  double grad0_norm = 0;  // ‖∇f(z0)‖
  double feas0_norm = 0;  // ‖viol(z0)‖
  bool affine = true;     // constraint kind
  std::optional<double> m_f{};  // generator curvature hint, when known
};

struct Trace {
  TraceHeader header;
  std::vector<TraceRecord> records;
};

// JSON-lines serialization: {"type":"header",...} then {"type":"iter",...}.
void write_trace_jsonl(std::ostream& os, const Trace& trace);
Trace read_trace_jsonl(std::istream& is);
void write_trace_file(const std::string& path, const Trace& trace);
Trace read_trace_file(const std::string& path);

}  // namespace aspal
