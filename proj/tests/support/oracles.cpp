#include "support/oracles.hpp"

#include <Eigen/Dense>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <sys/wait.h>

namespace aspal::testing {

namespace {

double sq_dist(const Vector& a, const Vector& b) { return (a - b).squaredNorm(); }

}  // namespace

Vector brute_simplex_projection(const Vector& v) {
  const Index n = v.size();
  if (n > 20) throw std::invalid_argument("brute_simplex_projection: n too big");
  Vector best;
  double best_d = std::numeric_limits<double>::infinity();
  for (unsigned long mask = 1; mask < (1ul << n); ++mask) {
    double sum = 0;
    long card = 0;
    for (Index i = 0; i < n; ++i)
      if (mask & (1ul << i)) {
        sum += v(i);
        ++card;
      }
    const double theta = (sum - 1.0) / static_cast<double>(card);
    Vector x = Vector::Zero(n);
    bool ok = true;
    for (Index i = 0; i < n; ++i)
      if (mask & (1ul << i)) {
        x(i) = v(i) - theta;
        if (x(i) < 0) ok = false;
      }
    if (!ok) continue;
    const double d = sq_dist(x, v);
    if (d < best_d) {
      best_d = d;
      best = x;
    }
  }
  return best;
}

Vector brute_capped_simplex_projection(const Vector& v, double k) {
  const Index n = v.size();
  if (n > 12) throw std::invalid_argument("brute_capped_simplex: n too big");
  Vector best;
  double best_d = std::numeric_limits<double>::infinity();
  std::vector<int> state(n, 0);  // 0 = floor, 1 = free, 2 = cap
  const long patterns = static_cast<long>(std::pow(3.0, static_cast<double>(n)));
  for (long code = 0; code < patterns; ++code) {
    long c = code;
    double free_sum = 0;
    long n_free = 0, n_cap = 0;
    for (Index i = 0; i < n; ++i) {
      state[i] = static_cast<int>(c % 3);
      c /= 3;
      if (state[i] == 1) {
        free_sum += v(i);
        ++n_free;
      } else if (state[i] == 2) {
        ++n_cap;
      }
    }
    Vector x(n);
    if (n_free == 0) {
      if (std::abs(static_cast<double>(n_cap) - k) > 1e-9) continue;
      for (Index i = 0; i < n; ++i) x(i) = state[i] == 2 ? 1.0 : 0.0;
    } else {
      const double theta =
          (free_sum + static_cast<double>(n_cap) - k) / static_cast<double>(n_free);
      bool ok = true;
      for (Index i = 0; i < n; ++i) {
        if (state[i] == 0) {
          x(i) = 0.0;
        } else if (state[i] == 2) {
          x(i) = 1.0;
        } else {
          x(i) = v(i) - theta;
          if (x(i) < -1e-12 || x(i) > 1 + 1e-12) ok = false;
          x(i) = std::clamp(x(i), 0.0, 1.0);
        }
      }
      if (!ok) continue;
    }
    const double d = sq_dist(x, v);
    if (d < best_d) {
      best_d = d;
      best = x;
    }
  }
  return best;
}

Vector brute_box_qp(const Matrix& H, const Vector& g, double lo, double hi) {
  Matrix A(0, H.rows());
  Vector b(0);
  return brute_eq_box_qp(H, g, A, b, lo, hi).x;
}

EqBoxQpSolution brute_eq_box_qp(const Matrix& H, const Vector& g,
                                const Matrix& A, const Vector& b, double lo,
                                double hi) {
  const Index n = H.rows();
  const Index l = A.rows();
  if (n > 12) throw std::invalid_argument("brute_eq_box_qp: n too big");
  EqBoxQpSolution best;
  best.objective = std::numeric_limits<double>::infinity();
  std::vector<int> state(n, 0);  // 0 = at lo, 1 = free, 2 = at hi
  const long patterns = static_cast<long>(std::pow(3.0, static_cast<double>(n)));
  for (long code = 0; code < patterns; ++code) {
    long c = code;
    std::vector<Index> free_ix;
    Vector x(n);
    for (Index i = 0; i < n; ++i) {
      state[i] = static_cast<int>(c % 3);
      c /= 3;
      if (state[i] == 0)
        x(i) = lo;
      else if (state[i] == 2)
        x(i) = hi;
      else
        free_ix.push_back(i);
    }
    const Index nf = static_cast<Index>(free_ix.size());
    Vector p = Vector::Zero(l);
    if (nf + l > 0) {
      // Reduced KKT in the free coordinates: [H_FF A_Fᵀ; A_F 0][x_F; p] =
      // [−g_F − H_FA x_A; b − A_A x_A].
      Matrix K = Matrix::Zero(nf + l, nf + l);
      Vector rhs(nf + l);
      for (Index r = 0; r < nf; ++r) {
        for (Index s = 0; s < nf; ++s) K(r, s) = H(free_ix[r], free_ix[s]);
        for (Index s = 0; s < l; ++s) {
          K(r, nf + s) = A(s, free_ix[r]);
          K(nf + s, r) = A(s, free_ix[r]);
        }
        double acc = g(free_ix[r]);
        for (Index i = 0; i < n; ++i)
          if (state[i] != 1) acc += H(free_ix[r], i) * x(i);
        rhs(r) = -acc;
      }
      for (Index s = 0; s < l; ++s) {
        double acc = b(s);
        for (Index i = 0; i < n; ++i)
          if (state[i] != 1) acc -= A(s, i) * x(i);
        rhs(nf + s) = acc;
      }
      Eigen::FullPivLU<Matrix> lu(K);
      if (lu.rank() < nf + l) continue;
      const Vector sol = lu.solve(rhs);
      bool ok = true;
      for (Index r = 0; r < nf; ++r) {
        x(free_ix[r]) = sol(r);
        if (sol(r) < lo - 1e-10 || sol(r) > hi + 1e-10) ok = false;
      }
      if (!ok) continue;
      p = sol.tail(l);
      if (l > 0 && (A * x - b).norm() > 1e-8) continue;
    } else if (l > 0 && (A * x - b).norm() > 1e-9) {
      continue;
    }
    const double obj = 0.5 * x.dot(H * x) + g.dot(x);
    if (obj < best.objective) {
      best.objective = obj;
      best.x = x;
      best.p = p;
    }
  }
  if (!std::isfinite(best.objective))
    throw std::runtime_error("brute_eq_box_qp: no feasible pattern");
  return best;
}

Vector prox_gradient_min(const Matrix& H, const Vector& g,
                         const ProxOracle& psi_n, const Vector& x0, double tol,
                         long max_iters) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(H);
  const double L = std::max(eig.eigenvalues().maxCoeff(), 1e-12);
  const double step = 1.0 / L;
  Vector x = x0;
  for (long it = 0; it < max_iters; ++it) {
    const Vector next = psi_n.prox(x - step * (H * x + g), step);
    const double res = (next - x).norm();
    x = next;
    if (res <= tol * (1 + x.norm())) return x;
  }
  throw std::runtime_error("prox_gradient_min: no fixed point within budget");
}

bool in_simplex_normal_cone(const Vector& z, const Vector& v, double tol) {
  return v.maxCoeff() <= v.dot(z) + tol;
}

Matrix fd_hessian(const SmoothOracle& f, const Vector& z, double step) {
  const Index n = z.size();
  Matrix H(n, n);
  for (Index i = 0; i < n; ++i) {
    Vector e = Vector::Zero(n);
    e(i) = step;
    H.col(i) = (f.gradient(z + e) - f.gradient(z - e)) / (2 * step);
  }
  return 0.5 * (H + H.transpose());
}

CmdResult run_cmd(const std::string& cmd) {
  const std::string dir = make_temp_dir("cmd");
  const std::string out_path = dir + "/out", err_path = dir + "/err";
  const std::string full = cmd + " >" + out_path + " 2>" + err_path;
  const int status = std::system(full.c_str());
  CmdResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  auto slurp = [](const std::string& path) {
    std::ifstream is(path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
  };
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  std::filesystem::remove_all(dir);
  return r;
}

std::string make_temp_dir(const std::string& tag) {
  static long counter = 0;
  const auto base = std::filesystem::temp_directory_path() /
                    ("aspal_test_" + tag + "_" + std::to_string(::getpid()) +
                     "_" + std::to_string(counter++));
  std::filesystem::create_directories(base);
  return base.string();
}

}  // namespace aspal::testing
