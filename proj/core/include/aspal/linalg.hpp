#pragma once

#include "aspal/problem.hpp"

#include <cstdint>

namespace aspal {

// Operator 2-norm ‖A‖ via power iteration on A*A with a seeded deterministic
// start vector. Returns 0 for the zero operator. The estimate approaches ‖A‖
// from below, so it never exceeds ‖A‖(1+tol); the stopping rule targets a
// relative increment well under tol.
double estimate_spectral_norm(const LinearMap& A, double tol = 1e-4,
                              int max_iter = 1000,
                              std::uint64_t seed = 0x5eedULL);

// Eigendecomposition of a symmetric matrix, eigenvalues descending and
// eigenvectors column-matched. Input must be symmetric to 1e-10 (relative).
struct SymEig {
  Vector eigenvalues;
  Matrix eigenvectors;
};
SymEig sym_eig(const Matrix& M);

// Thin SVD M = U diag(s) V^T with singular values descending.
struct ThinSvd {
  Matrix U;
  Vector singular_values;
  Matrix V;
};
ThinSvd thin_svd(const Matrix& M);

}  // namespace aspal
