#pragma once

#include <aspal/linalg.hpp>
#include <aspal/problem.hpp>
#include <aspal/prox.hpp>
#include <aspal/rng.hpp>

#include <Eigen/QR>

#include <memory>
#include <utility>

// Hand-built problem instances shared across test binaries. Everything here
// is deliberately simple and independent of the generators under test.
namespace aspal::testing {

inline SmoothOracle make_quadratic(Matrix H, Vector g) {
  SmoothOracle f;
  auto Hp = std::make_shared<Matrix>(std::move(H));
  auto gp = std::make_shared<Vector>(std::move(g));
  f.value = [Hp, gp](const Vector& x) {
    return 0.5 * x.dot(*Hp * x) + gp->dot(x);
  };
  f.gradient = [Hp, gp](const Vector& x) { return Vector(*Hp * x + *gp); };
  return f;
}

// Random symmetric matrix with eigenvalues drawn uniformly from [lo, hi].
inline Matrix random_sym(Index n, double lo, double hi, Rng& rng) {
  Matrix G(n, n);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c) G(r, c) = rng.gaussian();
  const Matrix Q = Eigen::HouseholderQR<Matrix>(G).householderQ();
  Vector lam(n);
  for (Index i = 0; i < n; ++i) lam(i) = rng.uniform(lo, hi);
  return Q * lam.asDiagonal() * Q.transpose();
}

inline Vector random_vector(Index n, Rng& rng, double lo = -1, double hi = 1) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

struct EqBoxQp {
  Matrix H;
  Vector g;
  Matrix A;
  Vector b;
  double lo = 0.0;
  double hi = 1.0;
  ProblemInstance prob;
};

// Convex quadratic over a box, with full-row-rank equality constraints whose
// right-hand side is reachable from inside the box.
inline EqBoxQp random_eq_box_qp(Index n, Index l, Rng& rng, double eig_lo = 1.0,
                                double eig_hi = 6.0) {
  EqBoxQp qp;
  qp.H = random_sym(n, eig_lo, eig_hi, rng);
  qp.g = random_vector(n, rng);
  qp.A = Matrix(l, n);
  for (Index r = 0; r < l; ++r)
    for (Index c = 0; c < n; ++c) qp.A(r, c) = rng.gaussian();
  const Vector interior = random_vector(n, rng, 0.25, 0.75);
  qp.b = qp.A * interior;
  qp.lo = 0.0;
  qp.hi = 1.0;

  qp.prob.f = make_quadratic(qp.H, qp.g);
  qp.prob.f.weak_convexity = 0.0;
  qp.prob.h = make_box_prox(n, qp.lo, qp.hi);
  AffineConstraint aff;
  aff.map = matrix_map(qp.A);
  aff.rhs = qp.b;
  qp.prob.constraint = std::move(aff);
  qp.prob.z0 = interior;
  return qp;
}

}  // namespace aspal::testing
