#include "aspal/linalg.hpp"

#include "aspal/rng.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>

namespace aspal {

double estimate_spectral_norm(const LinearMap& A, double tol, int max_iter,
                              std::uint64_t seed) {
  if (A.rows <= 0 || A.cols <= 0) {
    throw std::invalid_argument("estimate_spectral_norm: empty operator");
  }
  if (!(tol > 0)) throw std::invalid_argument("tol must be positive");

  Rng rng(seed);
  Vector v(A.cols);
  for (Index i = 0; i < A.cols; ++i) v[i] = rng.uniform(-1.0, 1.0);
  double vn = v.norm();
  if (vn == 0) v.setOnes();  // cannot happen with the draws above; belt+braces
  v /= v.norm();

  double sigma = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector Av = A.apply(v);
    double s = Av.norm();
    if (s == 0) return 0.0;  // v in the null space with Rayleigh 0: zero map
    Vector w = A.adjoint(Av);
    double wn = w.norm();
    if (wn == 0) return s;  // A*Av = 0 exactly; s is the norm along v
    v = w / wn;
    // Rayleigh estimate grows monotonically; a small relative increment
    // means the dominant singular pair is resolved well within tol.
    if (it > 0 && std::abs(s - sigma) <= 0.25 * tol * s) return s;
    sigma = s;
  }
  return sigma;
}

SymEig sym_eig(const Matrix& M) {
  if (M.rows() != M.cols()) {
    throw std::invalid_argument("sym_eig: matrix must be square");
  }
  double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale) {
    throw std::invalid_argument("sym_eig: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(M);
  if (es.info() != Eigen::Success) {
    throw NumericError("sym_eig: eigendecomposition failed");
  }
  // Eigen sorts ascending; the contract is descending.
  SymEig out;
  out.eigenvalues = es.eigenvalues().reverse();
  out.eigenvectors = es.eigenvectors().rowwise().reverse();
  return out;
}

ThinSvd thin_svd(const Matrix& M) {
  Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw NumericError("thin_svd: decomposition failed");
  }
  return ThinSvd{svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

}  // namespace aspal
