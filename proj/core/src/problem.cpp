#include "aspal/problem.hpp"

#include <cmath>
#include <memory>
#include <string>
#include <utility>

namespace aspal {

LinearMap identity_map(Index n) {
  LinearMap m;
  m.rows = n;
  m.cols = n;
  m.apply = [](const Vector& v) { return v; };
  m.adjoint = [](const Vector& v) { return v; };
  return m;
}

LinearMap matrix_map(Matrix A) {
  auto mat = std::make_shared<Matrix>(std::move(A));
  LinearMap m;
  m.rows = mat->rows();
  m.cols = mat->cols();
  m.apply = [mat](const Vector& v) -> Vector { return (*mat) * v; };
  m.adjoint = [mat](const Vector& v) -> Vector {
    return mat->transpose() * v;
  };
  return m;
}

const LinearMap& constraint_map(const Constraint& c) {
  if (const auto* aff = std::get_if<AffineConstraint>(&c)) return aff->map;
  return std::get<SetConstraint>(c).map;
}

Vector constraint_violation(const Constraint& c, const Vector& Az) {
  if (const auto* aff = std::get_if<AffineConstraint>(&c)) {
    return Az - aff->rhs;
  }
  const auto& set = std::get<SetConstraint>(c);
  return Az - set.project(Az);
}

namespace {

double require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw NumericError(std::string("non-finite value in ") + what);
  }
  return v;
}

}  // namespace

double eval_aug_lagrangian(const Vector& z, const Vector& p, double c,
                           const ProblemInstance& prob) {
  const auto* aff = std::get_if<AffineConstraint>(&prob.constraint);
  if (aff == nullptr) {
    throw std::invalid_argument(
        "eval_aug_lagrangian requires an affine constraint");
  }
  if (!(c > 0)) throw std::invalid_argument("penalty c must be positive");
  Vector residual = aff->map.apply(z) - aff->rhs;
  double value = prob.f.value(z) + prob.h.value(z) + p.dot(residual) +
                 0.5 * c * residual.squaredNorm();
  return require_finite(value, "eval_aug_lagrangian");
}

double eval_aug_lagrangian_generalized(const Vector& z, const Vector& p,
                                       double c, const ProblemInstance& prob) {
  const auto* set = std::get_if<SetConstraint>(&prob.constraint);
  if (set == nullptr) {
    throw std::invalid_argument(
        "eval_aug_lagrangian_generalized requires a set-membership constraint");
  }
  if (!(c > 0)) throw std::invalid_argument("penalty c must be positive");
  Vector y = set->map.apply(z) + p / c;
  Vector d = y - set->project(y);
  double value = prob.f.value(z) + prob.h.value(z) - p.squaredNorm() / (2 * c) +
                 0.5 * c * d.squaredNorm();
  return require_finite(value, "eval_aug_lagrangian_generalized");
}

double eval_al(const Vector& z, const Vector& p, double c,
               const ProblemInstance& prob) {
  if (std::holds_alternative<AffineConstraint>(prob.constraint)) {
    return eval_aug_lagrangian(z, p, c, prob);
  }
  return eval_aug_lagrangian_generalized(z, p, c, prob);
}

Residuals stationarity_residuals(const Vector& z0, const Vector& z,
                                 const Vector& p, const Vector& w,
                                 const ProblemInstance& prob) {
  (void)p;  // the multiplier enters the certificate, not the normalization
  const LinearMap& A = constraint_map(prob.constraint);
  double grad0 = prob.f.gradient(z0).norm();
  double feas0 = constraint_violation(prob.constraint, A.apply(z0)).norm();
  double feas = constraint_violation(prob.constraint, A.apply(z)).norm();
  return Residuals{w.norm() / (1.0 + grad0), feas / (1.0 + feas0)};
}

}  // namespace aspal
