#include "aspal/adap_fista.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace aspal {

namespace {

// Round-off cushion for acceptance inequalities: exact ties must accept, and
// fp noise at vanishing step lengths must not read as curvature violations.
double slack(double a, double b, double c) {
  return 1e-13 * std::max({1.0, std::abs(a), std::abs(b), std::abs(c)});
}

void validate(const AdapFistaConfig& cfg) {
  if (!(cfg.mu > 0)) {
    throw std::invalid_argument("adap_fista: mu must be positive");
  }
  if (!(cfg.L0 > cfg.mu)) {
    throw std::invalid_argument("adap_fista: need L0 > mu");
  }
  if (!(cfg.chi > 0 && cfg.chi < 1)) {
    throw std::invalid_argument("adap_fista: need chi in (0,1)");
  }
  if (!(cfg.beta > 1)) {
    throw std::invalid_argument("adap_fista: need beta > 1");
  }
  if (!(cfg.sigma > 0 && cfg.sigma < 1)) {
    throw std::invalid_argument("adap_fista: need sigma in (0,1)");
  }
  if (cfg.max_iters <= 0) {
    throw std::invalid_argument("adap_fista: need max_iters > 0");
  }
}

}  // namespace

double step_coefficient(double tau, double A, double L, double mu) {
  if (!(L > mu)) throw std::invalid_argument("step_coefficient: need L > mu");
  if (!(tau > 0) || A < 0) {
    throw std::invalid_argument("step_coefficient: need tau > 0, A >= 0");
  }
  double Lm = L - mu;
  return (tau + std::sqrt(tau * tau + 4.0 * tau * A * Lm)) / (2.0 * Lm);
}

Vector composite_prox_step(const Vector& x_tilde, const Vector& grad_x_tilde,
                           double L, const ProxOracle& psi_n) {
  return psi_n.prox(x_tilde - grad_x_tilde / L, 1.0 / L);
}

Vector composite_prox_step(const Vector& x_tilde, double L,
                           const SmoothOracle& psi_s, const ProxOracle& psi_n) {
  return composite_prox_step(x_tilde, psi_s.gradient(x_tilde), L, psi_n);
}

bool curvature_ok(double psi_s_at_y, double psi_s_at_x, const Vector& grad_x,
                  const Vector& y, const Vector& x_tilde, double L,
                  double chi) {
  double lin = psi_s_at_x + grad_x.dot(y - x_tilde);
  double lhs = lin + 0.5 * (1.0 - chi) * L * (y - x_tilde).squaredNorm();
  return lhs >= psi_s_at_y - slack(psi_s_at_y, psi_s_at_x, lin);
}

BacktrackResult lipschitz_backtrack(const Vector& x_tilde, double L_in,
                                    const SmoothOracle& psi_s,
                                    const ProxOracle& psi_n, double chi,
                                    double beta, double L_cap) {
  if (!(L_in > 0)) throw std::invalid_argument("lipschitz_backtrack: L_in <= 0");
  if (!(beta > 1)) throw std::invalid_argument("lipschitz_backtrack: beta <= 1");
  Vector g = psi_s.gradient(x_tilde);
  double fx = psi_s.value(x_tilde);
  double L = L_in;
  long resolvents = 0;
  for (;;) {
    Vector y = composite_prox_step(x_tilde, g, L, psi_n);
    ++resolvents;
    if (curvature_ok(psi_s.value(y), fx, g, y, x_tilde, L, chi)) {
      return BacktrackResult{std::move(y), L, resolvents};
    }
    L *= beta;
    if (L > L_cap) {
      throw NumericError(
          "lipschitz_backtrack: curvature cap exceeded; the smooth oracle's "
          "value and gradient are inconsistent");
    }
  }
}

MomentumUpdate momentum_update(double A, double tau, const Vector& x,
                               const Vector& y_next, const Vector& x_tilde,
                               double mu, double L_next, double a) {
  MomentumUpdate out;
  out.A_next = A + a;
  out.tau_next = tau + a * mu;
  Vector s = (L_next - mu) * (x_tilde - y_next);
  out.x_next = (mu * a * y_next + tau * x - a * s) / out.tau_next;
  return out;
}

bool failure_test(const Vector& y_next, const Vector& x0, double A_next,
                  double L_next, const Vector& x_tilde, double chi) {
  double lhs = (y_next - x0).squaredNorm();
  double rhs = chi * A_next * L_next * (y_next - x_tilde).squaredNorm();
  return lhs >= rhs - slack(lhs, rhs, 0.0);  // ties continue
}

Vector residual(const Vector& y_next, const Vector& x_tilde,
                const Vector& grad_y_next, const Vector& grad_x_tilde,
                double L_next) {
  return grad_y_next - grad_x_tilde + L_next * (x_tilde - y_next);
}

AdapFistaResult adap_fista(const SmoothOracle& psi_s, const ProxOracle& psi_n,
                           const Vector& x0, const AdapFistaConfig& cfg) {
  validate(cfg);
  AdapFistaResult res;
  Vector x = x0, y = x0;
  double A = 0.0, tau = 1.0, L = cfg.L0;

  for (long j = 0;; ++j) {
    if (j >= cfg.max_iters) {
      throw SafeguardExhausted("adap_fista: iteration safeguard exhausted");
    }
    if (cfg.tick && j > 0 && (j & 255) == 0) cfg.tick();

    // Steps 1-2: the curvature candidate L enters both the step coefficient
    // and the averaging point, so every backtracking retry recomputes a and
    // x_tilde before retaking the prox step.
    long retries = 0;
    double a = 0, fx = 0;
    Vector x_tilde, g, y_next;
    for (;;) {
      a = step_coefficient(tau, A, L, cfg.mu);
      x_tilde = (A * y + a * x) / (A + a);
      g = psi_s.gradient(x_tilde);
      fx = psi_s.value(x_tilde);
      y_next = composite_prox_step(x_tilde, g, L, psi_n);
      ++res.resolvents;
      if (curvature_ok(psi_s.value(y_next), fx, g, y_next, x_tilde, L,
                       cfg.chi)) {
        break;
      }
      L *= cfg.beta;
      ++retries;
      if (L > cfg.L_cap) {
        throw NumericError(
            "adap_fista: curvature cap exceeded; the smooth oracle's value "
            "and gradient are inconsistent");
      }
    }
    ++res.iterations;

    // Step 3: momentum recursion.
    MomentumUpdate mom = momentum_update(A, tau, x, y_next, x_tilde, cfg.mu, L, a);
    if (cfg.observer) {
      cfg.observer(AdapFistaIterate{j, a, A, mom.A_next, tau, mom.tau_next, L,
                                    retries});
    }

    // Step 4: divergence check; failing it reports the modulus assumption as
    // broken rather than iterating forever.
    if (!failure_test(y_next, x0, mom.A_next, L, x_tilde, cfg.chi)) {
      res.success = false;
      res.y = std::move(y_next);
      res.L_last = L;
      return res;
    }

    // Step 5: stationarity certificate.
    Vector gy = psi_s.gradient(y_next);
    Vector u = residual(y_next, x_tilde, gy, g, L);
    if (u.norm() <= cfg.sigma * (y_next - x0).norm()) {
      res.success = true;
      res.y = std::move(y_next);
      res.u = std::move(u);
      res.L_last = L;
      return res;
    }

    y = std::move(y_next);
    x = std::move(mom.x_next);
    A = mom.A_next;
    tau = mom.tau_next;
  }
}

}  // namespace aspal
