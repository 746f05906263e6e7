#include <aspal/linalg.hpp>
#include <aspal/rng.hpp>

#include <gtest/gtest.h>

namespace aspal {
namespace {

Matrix random_matrix(Index rows, Index cols, Rng& rng) {
  Matrix M(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) M(r, c) = rng.uniform(-1, 1);
  return M;
}

TEST(SpectralNorm, DiagonalMatrix) {
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 3.0;
  D(1, 1) = 1.0;
  EXPECT_NEAR(estimate_spectral_norm(matrix_map(D)), 3.0, 3e-4);
}

TEST(SpectralNorm, RankOneOuterProduct) {
  // ‖u v^T‖ = ‖u‖·‖v‖ = 2·5 = 10.
  Rng rng(11);
  Vector u(6), v(4);
  for (Index i = 0; i < 6; ++i) u(i) = rng.gaussian();
  for (Index i = 0; i < 4; ++i) v(i) = rng.gaussian();
  u *= 2.0 / u.norm();
  v *= 5.0 / v.norm();
  const Matrix M = u * v.transpose();
  EXPECT_NEAR(estimate_spectral_norm(matrix_map(M)), 10.0, 1e-3);
}

TEST(SpectralNorm, MatchesDirectSvdOnRandomRectangular) {
  Rng rng(19);
  for (int t = 0; t < 10; ++t) {
    const Matrix M = random_matrix(7, 5, rng);
    const double direct = thin_svd(M).singular_values.maxCoeff();
    EXPECT_NEAR(estimate_spectral_norm(matrix_map(M), 1e-8, 10000), direct,
                1e-5 * direct);
  }
}

TEST(SpectralNorm, ZeroMapIsZero) {
  EXPECT_DOUBLE_EQ(estimate_spectral_norm(matrix_map(Matrix::Zero(3, 3))), 0.0);
}

TEST(SymEig, DiagonalEigenvaluesDescending) {
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = -1.0;
  D(1, 1) = 2.0;
  const SymEig eig = sym_eig(D);
  EXPECT_NEAR(eig.eigenvalues(0), 2.0, 1e-14);
  EXPECT_NEAR(eig.eigenvalues(1), -1.0, 1e-14);
  // Eigenvector for 2 is e2 up to sign.
  EXPECT_NEAR(std::abs(eig.eigenvectors(1, 0)), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(eig.eigenvectors(0, 1)), 1.0, 1e-14);
}

TEST(SymEig, ReconstructsRandomSymmetricMatrices) {
  Rng rng(29);
  for (int t = 0; t < 10; ++t) {
    const Matrix B = random_matrix(8, 8, rng);
    const Matrix S = 0.5 * (B + B.transpose());
    const SymEig eig = sym_eig(S);
    for (Index i = 0; i + 1 < eig.eigenvalues.size(); ++i)
      EXPECT_GE(eig.eigenvalues(i), eig.eigenvalues(i + 1));
    const Matrix rebuilt = eig.eigenvectors *
                           eig.eigenvalues.asDiagonal() *
                           eig.eigenvectors.transpose();
    EXPECT_LT((rebuilt - S).norm(), 1e-12 * (1 + S.norm()));
    const Matrix gram =
        eig.eigenvectors.transpose() * eig.eigenvectors;
    EXPECT_LT((gram - Matrix::Identity(8, 8)).norm(), 1e-13);
  }
}

TEST(ThinSvd, RankOneRecoversScaledFactors) {
  Rng rng(37);
  Vector u(5), v(3);
  for (Index i = 0; i < 5; ++i) u(i) = rng.gaussian();
  for (Index i = 0; i < 3; ++i) v(i) = rng.gaussian();
  u *= 2.0 / u.norm();
  v *= 5.0 / v.norm();
  const ThinSvd svd = thin_svd(u * v.transpose());
  EXPECT_NEAR(svd.singular_values(0), 10.0, 1e-12);
  for (Index i = 1; i < svd.singular_values.size(); ++i)
    EXPECT_NEAR(svd.singular_values(i), 0.0, 1e-12);
}

TEST(ThinSvd, ReconstructsRandomRectangular) {
  Rng rng(43);
  for (const auto [rows, cols] : {std::pair<Index, Index>{6, 4}, {4, 6}}) {
    const Matrix M = random_matrix(rows, cols, rng);
    const ThinSvd svd = thin_svd(M);
    EXPECT_EQ(svd.U.rows(), rows);
    EXPECT_EQ(svd.V.rows(), cols);
    EXPECT_EQ(svd.U.cols(), svd.V.cols());
    for (Index i = 0; i + 1 < svd.singular_values.size(); ++i)
      EXPECT_GE(svd.singular_values(i), svd.singular_values(i + 1));
    EXPECT_GE(svd.singular_values.minCoeff(), 0.0);
    const Matrix rebuilt =
        svd.U * svd.singular_values.asDiagonal() * svd.V.transpose();
    EXPECT_LT((rebuilt - M).norm(), 1e-12 * (1 + M.norm()));
    EXPECT_LT((svd.U.transpose() * svd.U -
               Matrix::Identity(svd.U.cols(), svd.U.cols()))
                  .norm(),
              1e-13);
    EXPECT_LT((svd.V.transpose() * svd.V -
               Matrix::Identity(svd.V.cols(), svd.V.cols()))
                  .norm(),
              1e-13);
  }
}

TEST(ThinSvd, AgreesWithGramEigenvaluesSquared) {
  Rng rng(51);
  const Matrix M = random_matrix(5, 7, rng);
  const Vector sv = thin_svd(M).singular_values;
  const Vector lam = sym_eig(Matrix(M * M.transpose())).eigenvalues;
  for (Index i = 0; i < sv.size(); ++i)
    EXPECT_NEAR(sv(i) * sv(i), std::max(lam(i), 0.0), 1e-11 * (1 + lam(0)));
}

}  // namespace
}  // namespace aspal
