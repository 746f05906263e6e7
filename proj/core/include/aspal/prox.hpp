#pragma once

#include "aspal/problem.hpp"

namespace aspal {

// Euclidean projection onto the unit simplex {x ≥ 0, Σx = 1}. Sort-based,
// exact up to floating point (no iterative tolerance).
Vector project_simplex(const Vector& v);

// Componentwise clamp onto [lo, hi]^n (lo ≤ hi).
Vector project_box(const Vector& v, double lo, double hi);

// Projection onto the capped simplex {0 ≤ x ≤ 1, Σx = k}, 0 < k ≤ n, via
// bisection on the shift θ of clamp(v − θ, 0, 1); terminates when
// |Σx − k| ≤ 1e-12·max(1, k).
Vector project_capped_simplex(const Vector& v, double k);

// Spectral projections; the input is symmetrized as (M + Mᵀ)/2 before the
// eigendecomposition.
Matrix project_spectraplex(const Matrix& M);        // {X ⪰ 0, tr X = 1}
Matrix project_fantope(const Matrix& M, double k);  // {0 ⪯ X ⪯ I, tr X = k}

// Prox of t‖·‖_* (singular value soft-thresholding), t ≥ 0.
Matrix prox_nuclear(const Matrix& M, double t);

// ProxOracle builders over (flattened, column-major) vectors.
ProxOracle make_zero_prox();                                 // h ≡ 0
ProxOracle make_simplex_prox(Index n);                       // δ_{Δ^n}
ProxOracle make_box_prox(Index n, double lo, double hi);     // δ_{[lo,hi]^n}
ProxOracle make_spectraplex_prox(Index n);                   // δ_{P^n}, n×n
ProxOracle make_fantope_prox(Index n, double k);             // δ_{F^k}, n×n
ProxOracle make_nuclear_prox(Index rows, Index cols, double t);  // t‖·‖_*

}  // namespace aspal
