#include "aspal/prox.hpp"

#include "aspal/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

namespace aspal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Indicator tolerances: prox outputs are feasible to a few ulps, but the
// indicator value is evaluated at those outputs inside Lagrangian sums, so
// membership tests carry a small relative cushion.
constexpr double kMemberTol = 1e-7;

Matrix unflatten(const Vector& v, Index rows, Index cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Vector flatten(const Matrix& M) {
  return Eigen::Map<const Vector>(M.data(), M.size());
}

Matrix symmetrize(const Matrix& M) {
  return 0.5 * (M + M.transpose());
}

}  // namespace

Vector project_simplex(const Vector& v) {
  const Index n = v.size();
  if (n == 0) throw std::invalid_argument("project_simplex: empty input");
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  // Largest prefix whose water level keeps every kept coordinate positive.
  double cumsum = 0.0, theta = 0.0;
  Index rho = 0;
  for (Index j = 0; j < n; ++j) {
    cumsum += u[j];
    double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0) {
      rho = j + 1;
      theta = t;
    }
  }
  return (v.array() - theta).cwiseMax(0.0);
}

Vector project_box(const Vector& v, double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("project_box: lo > hi");
  return v.cwiseMax(lo).cwiseMin(hi);
}

Vector project_capped_simplex(const Vector& v, double k) {
  const Index n = v.size();
  if (n == 0) throw std::invalid_argument("project_capped_simplex: empty input");
  if (!(k > 0) || k > static_cast<double>(n)) {
    throw std::invalid_argument("project_capped_simplex: need 0 < k <= n");
  }
  auto mass = [&](double theta) {
    return (v.array() - theta).cwiseMax(0.0).cwiseMin(1.0).sum();
  };
  // mass(theta) is continuous and nonincreasing; bracket the root and bisect.
  double lo = v.minCoeff() - 1.0;  // mass = n >= k
  double hi = v.maxCoeff();        // mass = 0 <= k
  const double tol = 1e-12 * std::max(1.0, k);
  double theta = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    theta = 0.5 * (lo + hi);
    double m = mass(theta);
    if (std::abs(m - k) <= tol) break;
    if (m > k) {
      lo = theta;
    } else {
      hi = theta;
    }
  }
  Vector x = (v.array() - theta).cwiseMax(0.0).cwiseMin(1.0);
  if (std::abs(x.sum() - k) > tol) {
    throw NumericError("project_capped_simplex: bisection did not converge");
  }
  return x;
}

Matrix project_spectraplex(const Matrix& M) {
  SymEig eig = sym_eig(symmetrize(M));
  Vector lam = project_simplex(eig.eigenvalues);
  return eig.eigenvectors * lam.asDiagonal() * eig.eigenvectors.transpose();
}

Matrix project_fantope(const Matrix& M, double k) {
  SymEig eig = sym_eig(symmetrize(M));
  Vector lam = project_capped_simplex(eig.eigenvalues, k);
  return eig.eigenvectors * lam.asDiagonal() * eig.eigenvectors.transpose();
}

Matrix prox_nuclear(const Matrix& M, double t) {
  if (t < 0) throw std::invalid_argument("prox_nuclear: t must be >= 0");
  ThinSvd svd = thin_svd(M);
  Vector s = (svd.singular_values.array() - t).cwiseMax(0.0);
  return svd.U * s.asDiagonal() * svd.V.transpose();
}

ProxOracle make_zero_prox() {
  ProxOracle h;
  h.value = [](const Vector&) { return 0.0; };
  h.prox = [](const Vector& v, double) { return v; };
  h.lipschitz = 0.0;
  return h;
}

ProxOracle make_simplex_prox(Index n) {
  ProxOracle h;
  h.value = [](const Vector& z) {
    if (z.minCoeff() < -kMemberTol || std::abs(z.sum() - 1.0) > kMemberTol) {
      return kInf;
    }
    return 0.0;
  };
  h.prox = [](const Vector& v, double) { return project_simplex(v); };
  h.lipschitz = 0.0;
  h.diameter = std::numbers::sqrt2;
  (void)n;
  return h;
}

ProxOracle make_box_prox(Index n, double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("make_box_prox: lo > hi");
  ProxOracle h;
  double tol = kMemberTol * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  h.value = [lo, hi, tol](const Vector& z) {
    if (z.minCoeff() < lo - tol || z.maxCoeff() > hi + tol) return kInf;
    return 0.0;
  };
  h.prox = [lo, hi](const Vector& v, double) { return project_box(v, lo, hi); };
  h.lipschitz = 0.0;
  h.diameter = (hi - lo) * std::sqrt(static_cast<double>(n));
  return h;
}

ProxOracle make_spectraplex_prox(Index n) {
  ProxOracle h;
  h.value = [n](const Vector& z) {
    Matrix Z = symmetrize(unflatten(z, n, n));
    SymEig eig = sym_eig(Z);
    if (eig.eigenvalues.minCoeff() < -kMemberTol ||
        std::abs(eig.eigenvalues.sum() - 1.0) > kMemberTol) {
      return kInf;
    }
    return 0.0;
  };
  h.prox = [n](const Vector& v, double) {
    return flatten(project_spectraplex(unflatten(v, n, n)));
  };
  h.lipschitz = 0.0;
  h.diameter = std::numbers::sqrt2;
  return h;
}

ProxOracle make_fantope_prox(Index n, double k) {
  if (!(k > 0) || k > static_cast<double>(n)) {
    throw std::invalid_argument("make_fantope_prox: need 0 < k <= n");
  }
  ProxOracle h;
  double tol = kMemberTol * std::max(1.0, k);
  h.value = [n, k, tol](const Vector& z) {
    Matrix Z = symmetrize(unflatten(z, n, n));
    SymEig eig = sym_eig(Z);
    if (eig.eigenvalues.minCoeff() < -tol ||
        eig.eigenvalues.maxCoeff() > 1.0 + tol ||
        std::abs(eig.eigenvalues.sum() - k) > tol) {
      return kInf;
    }
    return 0.0;
  };
  h.prox = [n, k](const Vector& v, double) {
    return flatten(project_fantope(unflatten(v, n, n), k));
  };
  h.lipschitz = 0.0;
  h.diameter = std::sqrt(2.0 * k);
  return h;
}

ProxOracle make_nuclear_prox(Index rows, Index cols, double t) {
  if (t < 0) throw std::invalid_argument("make_nuclear_prox: t must be >= 0");
  ProxOracle h;
  h.value = [rows, cols, t](const Vector& z) {
    return t * thin_svd(unflatten(z, rows, cols)).singular_values.sum();
  };
  h.prox = [rows, cols, t](const Vector& v, double gamma) {
    return flatten(prox_nuclear(unflatten(v, rows, cols), t * gamma));
  };
  h.lipschitz = t * std::sqrt(static_cast<double>(std::min(rows, cols)));
  return h;
}

}  // namespace aspal
