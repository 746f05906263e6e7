#pragma once

#include "aspal/problem.hpp"
#include "aspal/solver.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace aspal {

enum class Family { QpSimplex, QpBox, Qsdp, SparsePca, Bmc };
const char* family_name(Family f);
Family family_from_name(const std::string& name);

struct RatingTriplet {
  long user = 0;   // raw id as it appears in the file
  long movie = 0;
  double rating = 0;
};

// Everything needed to rebuild an instance bit-for-bit: family, dims,
// curvature targets, family parameters, seed. BMC embeds its ratings.
struct GenSpec {
  Family family = Family::QpSimplex;
  std::uint64_t seed = 0;
  Index n = 0;          // vector dim (QP), matrix order (QSDP/SPCA), users (BMC)
  Index l = 0;          // constraint rows (QP/QSDP), movies (BMC)
  double m_f = 0, L_f = 0;  // curvature targets where applicable
  // family parameters
  double r = 1.0;           // QP-box half-width
  double density = 0.05;    // QSDP sparsity
  Index k = 1;              // SPCA fantope rank
  Index s = 1;              // SPCA planted support size
  double vartheta = 100.0;  // SPCA soft-threshold scale
  double b_mcp = 0.008;     // SPCA concave-quadratic width (m_f = L_f = 1/b)
  double upsilon = 0.5, tau_m = 1.0, theta = 0.5;  // BMC penalty parameters
  double lo = 0.0, hi = 5.0;                       // BMC box S = [lo, hi]
  std::string ratings_path;             // BMC source file (informational)
  std::vector<RatingTriplet> ratings;   // BMC data, embedded once loaded
};

void to_json(nlohmann::json& j, const GenSpec& spec);
void from_json(const nlohmann::json& j, GenSpec& spec);

// Family-specific parameters in "key=value;key=value" form for reports.
std::string extra_params(const GenSpec& spec);

struct GeneratedInstance {
  ProblemInstance problem;
  GenSpec spec;
  Vector witness;          // feasible point: ‖A·witness − b‖ ≤ 1e-12 (affine)
  nlohmann::json metadata; // derived quantities recorded at generation time
};

// Hessian scaling (τ1, τ2) = (m_f/λ_max(Hn), L_f/λ_max(Hp)) so that
// ∇²f = −τ1·Hn + τ2·Hp has −λ_min ≤ m_f and λ_max ≤ L_f (upper bounds).
// Hn, Hp must be symmetric PSD and nonzero; λ_max via exact dense eig.
struct CurvatureScaling {
  double tau1, tau2;
};
CurvatureScaling curvature_scaling(const Matrix& Hn, const Matrix& Hp,
                                   double m_f, double L_f);

// Nonconvex QP over the unit simplex:
//   f(z) = −(τ1/2)‖DBz‖² + (τ2/2)‖Cz − d‖²,  h = δ_{Δ^n},  Az = b := A(e/n).
// Draw order (SplitMix64(seed), row-major): A, B, C, d ~ U[0,1]; diag(D) ~
// U[1,1000]; z* ~ U[0,1]^n, z0 = z*/Σz*.
GeneratedInstance gen_qp_simplex(Index n, Index l, double m_f, double L_f,
                                 std::uint64_t seed);

// Same objective over the box [−r, r]^n; b = A·u and z0 ~ U[−r,r]^n with the
// witness u ~ U[−r,r]^n drawn after D, before z0.
GeneratedInstance gen_qp_box(Index n, Index l, double r, double m_f,
                             double L_f, std::uint64_t seed);

// Nonconvex QSDP over the spectraplex P^n = {X ⪰ 0, tr X = 1}:
//   f(Z) = −(τ1/2)‖D·B(Z)‖² + (τ2/2)‖C(Z) − d‖², A(Z) = b := A(I/n).
// A_i, B_j, C_i are symmetrized sparse matrices (entry kept with prob
// `density`, value U[0,1]). Draw order: A_1..A_l, B_1..B_n, C_1..C_l (per
// matrix: row-major, for each entry one U[0,1] keep-draw then one U[0,1]
// value-draw if kept), d ~ U[0,1]^l, diag(D) ~ U[1,1000]^n, then G ~
// U[0,1]^{n×n} row-major with z0 = GG^T/tr(GG^T).
GeneratedInstance gen_qsdp(Index n, Index l, double density, double m_f,
                           double L_f, std::uint64_t seed);

// Sparse PCA surrogate on stacked variables (Π, Φ) ∈ R^{2n²}:
//   f = ⟨Σ, Π⟩ + Σ_ij q_ϑ(Φ_ij),  h = δ_{F^k}(Π) + ϑ‖Φ‖_1,  Π − Φ = 0,
// with q_ϑ(t) = −t²/(2b) for |t| ≤ bϑ, else bϑ²/2 − ϑ|t| (m_f = L_f = 1/b).
// Σ = PΛP^T, Λ = (100, 1, …, 1); P's first column is 1/√s on the first s
// coordinates, remaining entries ~ gaussian (column-major over columns
// 2..n), then Gram–Schmidt keeps column 1 exact. z0 = (D_k, 0) where D_k is
// diagonal with k leading ones.
GeneratedInstance gen_spca(Index n, Index k, Index s, double vartheta,
                           double b_mcp, std::uint64_t seed);

// Matrix completion with an MCP-flavored spectral penalty on X ∈ R^{p×q}:
//   f(X) = ½‖P_Ω(X − Q)‖² + τ_m Σ_i [κ(σ_i(X)) − κ0 σ_i(X)],
//   h = τ_m κ0 ‖X‖_*,  X ∈ S = [lo, hi]^{p×q},  κ(t) = υ log(1 + |t|/θ),
// κ0 = υ/θ, m_f = 2υτ_m/θ², L_f = max{1, m_f}, X0 = 0.
GeneratedInstance make_bmc(const std::vector<RatingTriplet>& ratings,
                           double upsilon, double tau_m, double theta,
                           double lo, double hi);
GeneratedInstance load_bmc(const std::string& ratings_path, double upsilon,
                           double tau_m, double theta, double lo, double hi);

// Dispatch on spec.family; identical specs produce bit-identical instances.
GeneratedInstance generate(const GenSpec& spec);

// "userId,movieId,rating" rows (optional header tolerated); malformed rows
// are rejected with their 1-based line numbers.
std::vector<RatingTriplet> parse_ratings_csv(std::istream& is);
std::vector<RatingTriplet> parse_ratings_file(const std::string& path);

// Deterministic stand-in for a real ratings file: `count` distinct cells of a
// users×movies grid, ratings on the {0.5, 1, …, 5} half-star grid.
std::vector<RatingTriplet> synthetic_ratings(Index users, Index movies,
                                             Index count, std::uint64_t seed);

// Instance files: generator spec + metadata (ratings embedded for BMC);
// reading regenerates the oracles deterministically.
void write_instance_file(const std::string& path,
                         const GeneratedInstance& inst);
GeneratedInstance read_instance_file(const std::string& path);

// Solver defaults per family: global (σ, χ, β, μ) = (0.1, 0.5005, 1.25, 1/4)
// plus the per-family (c1, λ̄, M0, doubling threshold) table. Families with a
// curvature target derive λ̄ from m_f.
AspalConfig default_solver_config(const GenSpec& spec);

}  // namespace aspal
