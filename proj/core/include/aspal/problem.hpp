#pragma once

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <stdexcept>
#include <variant>

namespace aspal {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Raised when oracle outputs are inconsistent with their declared contract:
// non-finite values, curvature that defeats every backtracking cap, a fixed
// prox stepsize whose subproblem cannot be solved, stepsize underflow.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when an iterative routine exhausts its safeguard iteration budget.
// Distinct from an algorithmic failure outcome, which is a normal result.
struct SafeguardExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Smooth term f: value + gradient. Curvature hints, when present, assert
// that f + (m/2)‖·‖² is convex and ∇f is L-Lipschitz on dom h (m ≤ L).
struct SmoothOracle {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::optional<double> weak_convexity{};  // m_f
  std::optional<double> grad_lipschitz{};  // L_f
};

// Nonsmooth convex term h with an exact proximal map
//   prox(v, γ) = argmin_x { h(x) + ‖x − v‖²/(2γ) },  γ > 0.
struct ProxOracle {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&, double)> prox;
  std::optional<double> lipschitz{};  // M_h: h is M_h-Lipschitz on dom h
  std::optional<double> diameter{};   // D_h: diameter of dom h
};

// Linear operator R^n → R^l as an apply/adjoint closure pair. Matrix-variable
// problems act on column-major flattenings, so the Euclidean inner product is
// the Frobenius one and no separate matrix plumbing is needed.
struct LinearMap {
  Index rows = 0;  // l
  Index cols = 0;  // n
  std::function<Vector(const Vector&)> apply;
  std::function<Vector(const Vector&)> adjoint;
};

LinearMap identity_map(Index n);
LinearMap matrix_map(Matrix A);

// Constraint: either A z = b or A z ∈ S with S a closed convex set given by
// its exact Euclidean projection.
struct AffineConstraint {
  LinearMap map;
  Vector rhs;
};
struct SetConstraint {
  LinearMap map;
  std::function<Vector(const Vector&)> project;
};
using Constraint = std::variant<AffineConstraint, SetConstraint>;

const LinearMap& constraint_map(const Constraint& c);

// A z − b, resp. A z − Π_S(A z); vanishes exactly at feasible points.
Vector constraint_violation(const Constraint& c, const Vector& Az);

struct ProblemInstance {
  SmoothOracle f;
  ProxOracle h;
  Constraint constraint;
  Vector z0;  // must lie in dom h
};

struct Tolerances {
  double rho_hat = 1e-4;  // stationarity target
  double eta_hat = 1e-4;  // feasibility target
};

// Augmented Lagrangian for the affine constraint A z = b:
//   L_c(z; p) = f(z) + h(z) + ⟨p, Az−b⟩ + (c/2)‖Az−b‖².
double eval_aug_lagrangian(const Vector& z, const Vector& p, double c,
                           const ProblemInstance& prob);

// Generalized form for A z ∈ S:
//   L_c(z; p) = f(z) + h(z) − ‖p‖²/(2c) + (c/2) dist²(Az + p/c, S).
double eval_aug_lagrangian_generalized(const Vector& z, const Vector& p,
                                       double c, const ProblemInstance& prob);

// Dispatches on the constraint kind.
double eval_al(const Vector& z, const Vector& p, double c,
               const ProblemInstance& prob);

struct Residuals {
  double rho_rel;  // ‖w‖ / (1 + ‖∇f(z0)‖)
  double eta_rel;  // ‖viol(z)‖ / (1 + ‖viol(z0)‖)
};

// Relative stationarity/feasibility residuals of a candidate triple (z, p, w),
// normalized against the starting point z0.
Residuals stationarity_residuals(const Vector& z0, const Vector& z,
                                 const Vector& p, const Vector& w,
                                 const ProblemInstance& prob);

}  // namespace aspal
