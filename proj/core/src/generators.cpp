#include "aspal/generators.hpp"

#include "aspal/linalg.hpp"
#include "aspal/prox.hpp"
#include "aspal/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <utility>

namespace aspal {

namespace {

Vector flatten(const Matrix& M) {
  return Eigen::Map<const Vector>(M.data(), M.size());
}

Matrix unflatten(const Vector& v, Index rows, Index cols) {
  if (v.size() != rows * cols) throw std::invalid_argument("bad flattened size");
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

// Row-major draw order so the sequence of uniforms is documented and stable.
Matrix draw_matrix(Rng& rng, Index rows, Index cols, double lo, double hi) {
  Matrix M(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) M(r, c) = rng.uniform(lo, hi);
  return M;
}

Vector draw_vector(Rng& rng, Index n, double lo, double hi) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

// Sparse symmetrized matrix: per entry (row-major) one keep-draw, then one
// value-draw if kept; result is (M + Mᵀ)/2.
Matrix draw_sparse_symmetric(Rng& rng, Index n, double density) {
  Matrix M = Matrix::Zero(n, n);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c)
      if (rng.uniform01() < density) M(r, c) = rng.uniform01();
  Matrix S = 0.5 * (M + M.transpose());
  return S;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

// Singular values of X via the small-side Gram eigenbasis — ~4x cheaper than a
// thin SVD at the sizes the matrix-completion oracles run at.
Vector gram_singular_values(const Matrix& X) {
  const Matrix gram = X.rows() <= X.cols() ? Matrix(X * X.transpose())
                                           : Matrix(X.transpose() * X);
  return sym_eig(gram).eigenvalues.cwiseMax(0.0).cwiseSqrt();
}

// Spectral map F(X) = Σ_i φ(σ_i) u_i v_iᵀ with φ(0) = 0, evaluated without a
// full SVD as X·V diag(φ(σ)/σ) Vᵀ on the small-side Gram eigenbasis. Callers
// pass the ratio φ(σ)/σ extended continuously to σ = 0. Returns (F(X), σ).
template <class RatioFn>
std::pair<Matrix, Vector> gram_spectral_apply(const Matrix& X,
                                              RatioFn&& ratio_fn) {
  const bool rows_small = X.rows() <= X.cols();
  const Matrix gram =
      rows_small ? Matrix(X * X.transpose()) : Matrix(X.transpose() * X);
  const SymEig eig = sym_eig(gram);
  const Vector sigma = eig.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  Vector ratio(sigma.size());
  for (Index i = 0; i < sigma.size(); ++i) ratio(i) = ratio_fn(sigma(i));
  const Matrix& B = eig.eigenvectors;
  Matrix out = rows_small ? Matrix(B * ratio.asDiagonal() * B.transpose() * X)
                          : Matrix(X * B * ratio.asDiagonal() * B.transpose());
  return {std::move(out), std::move(sigma)};
}

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

// Shared state for the QP-style objective f(z) = −τ1/2‖Mz‖² + τ2/2‖Cz−d‖².
struct QuadData {
  Matrix M, C;
  Vector d;
  double tau1, tau2;
};

SmoothOracle make_quad_oracle(std::shared_ptr<const QuadData> q, double m_f,
                              double L_f) {
  SmoothOracle f;
  f.value = [q](const Vector& z) {
    return -0.5 * q->tau1 * (q->M * z).squaredNorm() +
           0.5 * q->tau2 * (q->C * z - q->d).squaredNorm();
  };
  f.gradient = [q](const Vector& z) {
    return Vector(-q->tau1 * (q->M.transpose() * (q->M * z)) +
                  q->tau2 * (q->C.transpose() * (q->C * z - q->d)));
  };
  f.weak_convexity = m_f;
  f.grad_lipschitz = L_f;
  return f;
}

// Exact curvature extremes of ∇²f = −τ1 MᵀM + τ2 CᵀC, recorded so instance
// metadata can show how tight the (m_f, L_f) targets are.
void record_hessian_extremes(nlohmann::json& meta, const Matrix& M,
                             const Matrix& C, double tau1, double tau2) {
  const Index dim = M.cols();
  if (dim > 1500) return;  // desk-scale guard; extremes are informational
  Matrix H = -tau1 * (M.transpose() * M) + tau2 * (C.transpose() * C);
  SymEig eig = sym_eig(H);
  meta["hessian_lambda_max"] = eig.eigenvalues(0);
  meta["hessian_lambda_min"] = eig.eigenvalues(dim - 1);
}

}  // namespace

const char* family_name(Family f) {
  switch (f) {
    case Family::QpSimplex: return "qp_simplex";
    case Family::QpBox: return "qp_box";
    case Family::Qsdp: return "qsdp";
    case Family::SparsePca: return "spca";
    case Family::Bmc: return "bmc";
  }
  throw std::invalid_argument("unknown family");
}

Family family_from_name(const std::string& name) {
  for (Family f : {Family::QpSimplex, Family::QpBox, Family::Qsdp,
                   Family::SparsePca, Family::Bmc})
    if (name == family_name(f)) return f;
  throw std::invalid_argument("unknown family name: " + name);
}

void to_json(nlohmann::json& j, const GenSpec& spec) {
  j = nlohmann::json{{"family", family_name(spec.family)},
                     {"seed", spec.seed},
                     {"n", spec.n},
                     {"l", spec.l},
                     {"m_f", spec.m_f},
                     {"L_f", spec.L_f},
                     {"r", spec.r},
                     {"density", spec.density},
                     {"k", spec.k},
                     {"s", spec.s},
                     {"vartheta", spec.vartheta},
                     {"b_mcp", spec.b_mcp},
                     {"upsilon", spec.upsilon},
                     {"tau_m", spec.tau_m},
                     {"theta", spec.theta},
                     {"lo", spec.lo},
                     {"hi", spec.hi}};
  if (!spec.ratings_path.empty()) j["ratings_path"] = spec.ratings_path;
  if (!spec.ratings.empty()) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : spec.ratings)
      arr.push_back({t.user, t.movie, t.rating});
    j["ratings"] = std::move(arr);
  }
}

void from_json(const nlohmann::json& j, GenSpec& spec) {
  GenSpec def;
  spec.family = family_from_name(j.at("family").get<std::string>());
  spec.seed = j.value("seed", def.seed);
  spec.n = j.value("n", def.n);
  spec.l = j.value("l", def.l);
  spec.m_f = j.value("m_f", def.m_f);
  spec.L_f = j.value("L_f", def.L_f);
  spec.r = j.value("r", def.r);
  spec.density = j.value("density", def.density);
  spec.k = j.value("k", def.k);
  spec.s = j.value("s", def.s);
  spec.vartheta = j.value("vartheta", def.vartheta);
  spec.b_mcp = j.value("b_mcp", def.b_mcp);
  spec.upsilon = j.value("upsilon", def.upsilon);
  spec.tau_m = j.value("tau_m", def.tau_m);
  spec.theta = j.value("theta", def.theta);
  spec.lo = j.value("lo", def.lo);
  spec.hi = j.value("hi", def.hi);
  spec.ratings_path = j.value("ratings_path", std::string{});
  spec.ratings.clear();
  if (j.contains("ratings")) {
    for (const auto& row : j.at("ratings")) {
      if (!row.is_array() || row.size() != 3)
        throw std::invalid_argument("ratings entries must be [user,movie,rating]");
      spec.ratings.push_back({row.at(0).get<long>(), row.at(1).get<long>(),
                              row.at(2).get<double>()});
    }
  }
}

std::string extra_params(const GenSpec& spec) {
  switch (spec.family) {
    case Family::QpSimplex: return "";
    case Family::QpBox: return "r=" + fmt(spec.r);
    case Family::Qsdp: return "density=" + fmt(spec.density);
    case Family::SparsePca:
      return "k=" + std::to_string(spec.k) + ";s=" + std::to_string(spec.s) +
             ";vartheta=" + fmt(spec.vartheta) + ";b=" + fmt(spec.b_mcp);
    case Family::Bmc:
      return "upsilon=" + fmt(spec.upsilon) + ";tau_m=" + fmt(spec.tau_m) +
             ";theta=" + fmt(spec.theta) + ";lo=" + fmt(spec.lo) +
             ";hi=" + fmt(spec.hi);
  }
  throw std::invalid_argument("unknown family");
}

CurvatureScaling curvature_scaling(const Matrix& Hn, const Matrix& Hp,
                                   double m_f, double L_f) {
  require(m_f > 0 && L_f > 0, "curvature targets must be positive");
  require(Hn.rows() == Hn.cols() && Hp.rows() == Hp.cols() &&
              Hn.rows() == Hp.rows(),
          "curvature factors must be square and same size");
  const double lam_n = sym_eig(Hn).eigenvalues(0);
  const double lam_p = sym_eig(Hp).eigenvalues(0);
  require(lam_n > 0 && lam_p > 0, "curvature factors must be nonzero PSD");
  return {m_f / lam_n, L_f / lam_p};
}

GeneratedInstance gen_qp_simplex(Index n, Index l, double m_f, double L_f,
                                 std::uint64_t seed) {
  require(n >= 2 && l >= 1, "qp_simplex needs n >= 2, l >= 1");
  require(m_f > 0 && L_f > 0, "qp_simplex needs positive curvature targets");
  require(m_f <= L_f, "qp_simplex needs m_f <= L_f");
  Rng rng(seed);
  Matrix A = draw_matrix(rng, l, n, 0, 1);
  Matrix B = draw_matrix(rng, n, n, 0, 1);
  Matrix C = draw_matrix(rng, l, n, 0, 1);
  Vector d = draw_vector(rng, l, 0, 1);
  Vector D = draw_vector(rng, n, 1, 1000);
  Vector zstar = draw_vector(rng, n, 0, 1);

  auto q = std::make_shared<QuadData>();
  q->M = D.asDiagonal() * B;
  q->C = std::move(C);
  q->d = std::move(d);
  CurvatureScaling sc = curvature_scaling(q->M.transpose() * q->M,
                                          q->C.transpose() * q->C, m_f, L_f);
  q->tau1 = sc.tau1;
  q->tau2 = sc.tau2;

  GeneratedInstance out;
  out.witness = Vector::Constant(n, 1.0 / static_cast<double>(n));
  Vector b = A * out.witness;
  out.problem.f = make_quad_oracle(q, m_f, L_f);
  out.problem.h = make_simplex_prox(n);
  out.problem.constraint = AffineConstraint{matrix_map(std::move(A)), b};
  out.problem.z0 = zstar / zstar.sum();
  out.spec.family = Family::QpSimplex;
  out.spec.seed = seed;
  out.spec.n = n;
  out.spec.l = l;
  out.spec.m_f = m_f;
  out.spec.L_f = L_f;
  out.metadata = {{"tau1", q->tau1}, {"tau2", q->tau2}};
  record_hessian_extremes(out.metadata, q->M, q->C, q->tau1, q->tau2);
  return out;
}

GeneratedInstance gen_qp_box(Index n, Index l, double r, double m_f,
                             double L_f, std::uint64_t seed) {
  require(n >= 2 && l >= 1, "qp_box needs n >= 2, l >= 1");
  require(r > 0, "qp_box needs r > 0");
  require(m_f > 0 && L_f > 0, "qp_box needs positive curvature targets");
  require(m_f <= L_f, "qp_box needs m_f <= L_f");
  Rng rng(seed);
  Matrix A = draw_matrix(rng, l, n, 0, 1);
  Matrix B = draw_matrix(rng, n, n, 0, 1);
  Matrix C = draw_matrix(rng, l, n, 0, 1);
  Vector d = draw_vector(rng, l, 0, 1);
  Vector D = draw_vector(rng, n, 1, 1000);
  Vector u = draw_vector(rng, n, -r, r);
  Vector z0 = draw_vector(rng, n, -r, r);

  auto q = std::make_shared<QuadData>();
  q->M = D.asDiagonal() * B;
  q->C = std::move(C);
  q->d = std::move(d);
  CurvatureScaling sc = curvature_scaling(q->M.transpose() * q->M,
                                          q->C.transpose() * q->C, m_f, L_f);
  q->tau1 = sc.tau1;
  q->tau2 = sc.tau2;

  GeneratedInstance out;
  out.witness = std::move(u);
  Vector b = A * out.witness;
  out.problem.f = make_quad_oracle(q, m_f, L_f);
  out.problem.h = make_box_prox(n, -r, r);
  out.problem.constraint = AffineConstraint{matrix_map(std::move(A)), b};
  out.problem.z0 = std::move(z0);
  out.spec.family = Family::QpBox;
  out.spec.seed = seed;
  out.spec.n = n;
  out.spec.l = l;
  out.spec.m_f = m_f;
  out.spec.L_f = L_f;
  out.spec.r = r;
  out.metadata = {{"tau1", q->tau1}, {"tau2", q->tau2}};
  record_hessian_extremes(out.metadata, q->M, q->C, q->tau1, q->tau2);
  return out;
}

GeneratedInstance gen_qsdp(Index n, Index l, double density, double m_f,
                           double L_f, std::uint64_t seed) {
  require(n >= 2 && l >= 1, "qsdp needs n >= 2, l >= 1");
  require(density > 0 && density <= 1, "qsdp needs density in (0, 1]");
  require(m_f > 0 && L_f > 0, "qsdp needs positive curvature targets");
  require(m_f <= L_f, "qsdp needs m_f <= L_f");
  Rng rng(seed);
  const Index nn = n * n;
  Matrix Aop(l, nn), Bop(n, nn), Cop(l, nn);
  for (Index i = 0; i < l; ++i)
    Aop.row(i) = flatten(draw_sparse_symmetric(rng, n, density)).transpose();
  for (Index j = 0; j < n; ++j)
    Bop.row(j) = flatten(draw_sparse_symmetric(rng, n, density)).transpose();
  for (Index i = 0; i < l; ++i)
    Cop.row(i) = flatten(draw_sparse_symmetric(rng, n, density)).transpose();
  Vector d = draw_vector(rng, l, 0, 1);
  Vector D = draw_vector(rng, n, 1, 1000);
  Matrix G = draw_matrix(rng, n, n, 0, 1);
  Matrix S = G * G.transpose();
  Vector z0 = flatten(Matrix(S / S.trace()));

  auto q = std::make_shared<QuadData>();
  q->M = D.asDiagonal() * Bop;
  q->C = std::move(Cop);
  q->d = std::move(d);
  // λ_max of the n²×n² Gram matrices via the thin factors: σ_max(F)² equals
  // λ_max(FᵀF) exactly, without forming the big product.
  const double sig_n = thin_svd(q->M).singular_values(0);
  const double sig_p = thin_svd(q->C).singular_values(0);
  require(sig_n > 0 && sig_p > 0, "qsdp operators degenerate at this density");
  q->tau1 = m_f / (sig_n * sig_n);
  q->tau2 = L_f / (sig_p * sig_p);

  GeneratedInstance out;
  out.witness = flatten(Matrix(Matrix::Identity(n, n) / static_cast<double>(n)));
  Vector b = Aop * out.witness;
  out.problem.f = make_quad_oracle(q, m_f, L_f);
  out.problem.h = make_spectraplex_prox(n);
  out.problem.constraint = AffineConstraint{matrix_map(std::move(Aop)), b};
  out.problem.z0 = std::move(z0);
  out.spec.family = Family::Qsdp;
  out.spec.seed = seed;
  out.spec.n = n;
  out.spec.l = l;
  out.spec.m_f = m_f;
  out.spec.L_f = L_f;
  out.spec.density = density;
  out.metadata = {{"tau1", q->tau1},
                  {"tau2", q->tau2},
                  {"z0_construction", "normalized_gram"}};
  return out;
}

GeneratedInstance gen_spca(Index n, Index k, Index s, double vartheta,
                           double b_mcp, std::uint64_t seed) {
  require(n >= 2, "spca needs n >= 2");
  require(k >= 1 && k <= n, "spca needs 1 <= k <= n");
  require(s >= 1 && s <= n, "spca needs 1 <= s <= n");
  require(vartheta > 0 && b_mcp > 0, "spca needs vartheta, b > 0");
  Rng rng(seed);
  Matrix P(n, n);
  P.col(0).setZero();
  for (Index i = 0; i < s; ++i) P(i, 0) = 1.0 / std::sqrt(double(s));
  for (Index j = 1; j < n; ++j)
    for (Index i = 0; i < n; ++i) P(i, j) = rng.gaussian();
  // Gram–Schmidt; the planted first column is already unit-norm.
  for (Index j = 0; j < n; ++j) {
    Vector v = P.col(j);
    for (Index i = 0; i < j; ++i) v -= P.col(i).dot(v) * P.col(i);
    const double nrm = v.norm();
    if (nrm < 1e-10) throw NumericError("spca basis degenerate");
    P.col(j) = v / nrm;
  }
  Vector lam = Vector::Ones(n);
  lam(0) = 100.0;
  Matrix Sigma = P * lam.asDiagonal() * P.transpose();
  Sigma = 0.5 * (Sigma + Sigma.transpose());

  const Index nn = n * n;
  struct SpcaData {
    Vector vec_sigma;
    double vt, b;
  };
  auto data = std::make_shared<SpcaData>();
  data->vec_sigma = flatten(Sigma);
  data->vt = vartheta;
  data->b = b_mcp;

  SmoothOracle f;
  f.value = [data, nn](const Vector& z) {
    double val = data->vec_sigma.dot(z.head(nn));
    const double cap = data->b * data->vt;
    for (Index i = 0; i < nn; ++i) {
      const double t = z(nn + i), a = std::abs(t);
      val += a <= cap ? -t * t / (2 * data->b)
                      : 0.5 * data->b * data->vt * data->vt - data->vt * a;
    }
    return val;
  };
  f.gradient = [data, nn](const Vector& z) {
    Vector g(2 * nn);
    g.head(nn) = data->vec_sigma;
    const double cap = data->b * data->vt;
    for (Index i = 0; i < nn; ++i) {
      const double t = z(nn + i);
      g(nn + i) = std::abs(t) <= cap ? -t / data->b
                                     : (t > 0 ? -data->vt : data->vt);
    }
    return g;
  };
  f.weak_convexity = 1.0 / b_mcp;
  f.grad_lipschitz = 1.0 / b_mcp;

  ProxOracle fantope = make_fantope_prox(n, static_cast<double>(k));
  ProxOracle h;
  h.value = [fantope, data, nn](const Vector& z) {
    return fantope.value(z.head(nn)) + data->vt * z.tail(nn).lpNorm<1>();
  };
  h.prox = [fantope, data, nn](const Vector& v, double gamma) {
    Vector out(2 * nn);
    out.head(nn) = fantope.prox(v.head(nn), gamma);
    const double t = gamma * data->vt;
    out.tail(nn) = v.tail(nn).array().sign() *
                   (v.tail(nn).array().abs() - t).max(0.0);
    return out;
  };

  LinearMap gap;  // (Π, Φ) ↦ vecΠ − vecΦ
  gap.rows = nn;
  gap.cols = 2 * nn;
  gap.apply = [nn](const Vector& z) { return Vector(z.head(nn) - z.tail(nn)); };
  gap.adjoint = [nn](const Vector& p) {
    Vector out(2 * nn);
    out.head(nn) = p;
    out.tail(nn) = -p;
    return out;
  };

  Matrix Dk = Matrix::Zero(n, n);
  for (Index i = 0; i < k; ++i) Dk(i, i) = 1.0;
  Vector vec_dk = flatten(Dk);

  GeneratedInstance out;
  out.problem.f = std::move(f);
  out.problem.h = std::move(h);
  out.problem.constraint = AffineConstraint{std::move(gap), Vector::Zero(nn)};
  out.problem.z0 = Vector::Zero(2 * nn);
  out.problem.z0.head(nn) = vec_dk;
  out.witness = Vector::Zero(2 * nn);
  out.witness.head(nn) = vec_dk;
  out.witness.tail(nn) = vec_dk;
  out.spec.family = Family::SparsePca;
  out.spec.seed = seed;
  out.spec.n = n;
  out.spec.l = nn;
  out.spec.m_f = 1.0 / b_mcp;
  out.spec.L_f = 1.0 / b_mcp;
  out.spec.k = k;
  out.spec.s = s;
  out.spec.vartheta = vartheta;
  out.spec.b_mcp = b_mcp;
  out.metadata = {{"sigma_lambda_max", 100.0}, {"planted_support", s}};
  return out;
}

GeneratedInstance make_bmc(const std::vector<RatingTriplet>& ratings,
                           double upsilon, double tau_m, double theta,
                           double lo, double hi) {
  require(!ratings.empty(), "bmc needs at least one rating");
  require(upsilon > 0 && tau_m >= 0 && theta > 0, "bmc needs positive penalty");
  require(lo < hi, "bmc needs lo < hi");
  std::unordered_map<long, Index> user_ix, movie_ix;
  for (const auto& t : ratings) {
    user_ix.emplace(t.user, static_cast<Index>(user_ix.size()));
    movie_ix.emplace(t.movie, static_cast<Index>(movie_ix.size()));
  }
  const Index p = static_cast<Index>(user_ix.size());
  const Index q = static_cast<Index>(movie_ix.size());

  struct BmcData {
    Matrix Q, mask;  // mask ∈ {0,1}^{p×q}
    double upsilon, tau_m, theta, kappa0;
    Index p, q;
    // Last spectral evaluation, shared between value and gradient calls at the
    // same point (the inner solver asks for both).
    std::mutex cache_mu;
    Vector cache_z, cache_sigma;
    Matrix cache_gspec;
    bool cache_valid = false;
  };
  auto data = std::make_shared<BmcData>();
  data->Q = Matrix::Zero(p, q);
  data->mask = Matrix::Zero(p, q);
  long duplicates = 0;
  for (const auto& t : ratings) {
    const Index i = user_ix.at(t.user), j = movie_ix.at(t.movie);
    if (data->mask(i, j) != 0.0) ++duplicates;  // last occurrence wins
    data->Q(i, j) = t.rating;
    data->mask(i, j) = 1.0;
  }
  data->upsilon = upsilon;
  data->tau_m = tau_m;
  data->theta = theta;
  data->kappa0 = upsilon / theta;
  data->p = p;
  data->q = q;

  // κ'(t) − κ0 = −υt/(θ(θ+t)), so the spectral gradient is
  //   Σ_i (κ'(σ_i) − κ0) u_i v_iᵀ = X · V diag(−υ/(θ(θ+σ_i))) Vᵀ · τ_m,
  // which needs only the eigenbasis of the small Gram matrix and stays finite
  // at σ_i = 0 (rank deficiency is harmless).
  auto spectral = [data](const Vector& z) {
    std::scoped_lock lock(data->cache_mu);
    if (!(data->cache_valid && data->cache_z.size() == z.size() &&
          (data->cache_z.array() == z.array()).all())) {
      auto [gspec, sigma] = gram_spectral_apply(
          unflatten(z, data->p, data->q), [&](double s) {
            return -data->tau_m * data->upsilon /
                   (data->theta * (data->theta + s));
          });
      data->cache_gspec = std::move(gspec);
      data->cache_sigma = std::move(sigma);
      data->cache_z = z;
      data->cache_valid = true;
    }
    return std::make_pair(data->cache_sigma, data->cache_gspec);
  };

  SmoothOracle f;
  f.value = [data, spectral](const Vector& z) {
    Matrix X = unflatten(z, data->p, data->q);
    double val =
        0.5 * (data->mask.array() * (X - data->Q).array()).matrix().squaredNorm();
    const Vector sv = spectral(z).first;
    for (Index i = 0; i < sv.size(); ++i)
      val += data->tau_m * (data->upsilon * std::log1p(sv(i) / data->theta) -
                            data->kappa0 * sv(i));
    return val;
  };
  f.gradient = [data, spectral](const Vector& z) {
    Matrix X = unflatten(z, data->p, data->q);
    Matrix G = (data->mask.array() * (X - data->Q).array()).matrix();
    G += spectral(z).second;
    return flatten(G);
  };
  const double m_f = 2 * upsilon * tau_m / (theta * theta);
  const double L_f = std::max(1.0, m_f);
  f.weak_convexity = m_f;
  f.grad_lipschitz = L_f;

  const Index dim = p * q;
  SetConstraint box;
  box.map = identity_map(dim);
  box.project = [lo, hi](const Vector& v) { return project_box(v, lo, hi); };

  // Same operator as make_nuclear_prox, but through the Gram eigenbasis:
  // ADAP-FISTA calls the prox once per iteration and the small-side eig is
  // ~4x cheaper than a thin SVD here.
  const double h_weight = tau_m * data->kappa0;
  ProxOracle h;
  h.value = [data, h_weight](const Vector& z) {
    return h_weight * gram_singular_values(unflatten(z, data->p, data->q)).sum();
  };
  h.prox = [data, h_weight](const Vector& v, double gamma) {
    const double t = gamma * h_weight;
    return flatten(gram_spectral_apply(unflatten(v, data->p, data->q),
                                       [t](double s) {
                                         return s > t ? 1.0 - t / s : 0.0;
                                       })
                       .first);
  };
  h.lipschitz = h_weight * std::sqrt(static_cast<double>(std::min(p, q)));

  GeneratedInstance out;
  out.problem.f = std::move(f);
  out.problem.h = std::move(h);
  out.problem.constraint = std::move(box);
  out.problem.z0 = Vector::Zero(dim);
  out.witness = Vector::Constant(dim, std::clamp(0.0, lo, hi));
  out.spec.family = Family::Bmc;
  out.spec.n = p;
  out.spec.l = q;
  out.spec.m_f = m_f;
  out.spec.L_f = L_f;
  out.spec.upsilon = upsilon;
  out.spec.tau_m = tau_m;
  out.spec.theta = theta;
  out.spec.lo = lo;
  out.spec.hi = hi;
  out.spec.ratings = ratings;
  out.metadata = {{"users", p},
                  {"movies", q},
                  {"ratings_count", static_cast<long>(ratings.size())},
                  {"duplicate_cells", duplicates},
                  {"kappa0", data->kappa0}};
  return out;
}

GeneratedInstance load_bmc(const std::string& ratings_path, double upsilon,
                           double tau_m, double theta, double lo, double hi) {
  GeneratedInstance out =
      make_bmc(parse_ratings_file(ratings_path), upsilon, tau_m, theta, lo, hi);
  out.spec.ratings_path = ratings_path;
  return out;
}

GeneratedInstance generate(const GenSpec& spec) {
  switch (spec.family) {
    case Family::QpSimplex:
      return gen_qp_simplex(spec.n, spec.l, spec.m_f, spec.L_f, spec.seed);
    case Family::QpBox:
      return gen_qp_box(spec.n, spec.l, spec.r, spec.m_f, spec.L_f, spec.seed);
    case Family::Qsdp:
      return gen_qsdp(spec.n, spec.l, spec.density, spec.m_f, spec.L_f,
                      spec.seed);
    case Family::SparsePca:
      return gen_spca(spec.n, spec.k, spec.s, spec.vartheta, spec.b_mcp,
                      spec.seed);
    case Family::Bmc: {
      GeneratedInstance out =
          spec.ratings.empty()
              ? load_bmc(spec.ratings_path, spec.upsilon, spec.tau_m,
                         spec.theta, spec.lo, spec.hi)
              : make_bmc(spec.ratings, spec.upsilon, spec.tau_m, spec.theta,
                         spec.lo, spec.hi);
      out.spec.ratings_path = spec.ratings_path;
      out.spec.seed = spec.seed;
      return out;
    }
  }
  throw std::invalid_argument("unknown family");
}

std::vector<RatingTriplet> parse_ratings_csv(std::istream& is) {
  std::vector<RatingTriplet> out;
  std::vector<std::size_t> bad;
  std::string line;
  std::size_t lineno = 0;
  bool first_content = true;
  auto parse_long = [](const std::string& s, long& v) {
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, v);
    return ec == std::errc{} && p == e;
  };
  auto parse_double = [](const std::string& s, double& v) {
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, v);
    return ec == std::errc{} && p == e && std::isfinite(v);
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    RatingTriplet t;
    const bool ok = fields.size() >= 3 && parse_long(fields[0], t.user) &&
                    parse_long(fields[1], t.movie) &&
                    parse_double(fields[2], t.rating) && t.user > 0 &&
                    t.movie > 0;
    if (ok) {
      out.push_back(t);
    } else if (first_content) {
      // A non-numeric first content line is a header; tolerated, not required.
    } else {
      bad.push_back(lineno);
    }
    first_content = false;
  }
  if (!bad.empty()) {
    std::string msg = "malformed ratings rows at line(s):";
    for (std::size_t i = 0; i < bad.size() && i < 20; ++i)
      msg += " " + std::to_string(bad[i]);
    if (bad.size() > 20) msg += " ...";
    throw std::invalid_argument(msg);
  }
  return out;
}

std::vector<RatingTriplet> parse_ratings_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open ratings file: " + path);
  return parse_ratings_csv(is);
}

std::vector<RatingTriplet> synthetic_ratings(Index users, Index movies,
                                             Index count, std::uint64_t seed) {
  require(users >= 1 && movies >= 1, "need users, movies >= 1");
  require(count >= std::max(users, movies) && count <= users * movies,
          "count must cover every row and column and fit the grid");
  Rng rng(seed);
  std::set<std::pair<Index, Index>> cells;
  std::vector<RatingTriplet> out;
  auto add = [&](Index u, Index m) {
    if (!cells.emplace(u, m).second) return false;
    const double star = 0.5 * (1.0 + std::floor(rng.uniform01() * 10.0));
    out.push_back({static_cast<long>(u + 1), static_cast<long>(m + 1), star});
    return true;
  };
  // Deterministic covering passes guarantee the reindexed matrix is exactly
  // users × movies; the remainder is rejection-sampled.
  for (Index u = 0; u < users; ++u) add(u, u % movies);
  for (Index m = 0; m < movies; ++m)
    if (m >= users) add(m % users, m);
  while (static_cast<Index>(cells.size()) < count) {
    const Index u =
        std::min<Index>(users - 1, static_cast<Index>(rng.uniform01() * users));
    const Index m = std::min<Index>(
        movies - 1, static_cast<Index>(rng.uniform01() * movies));
    add(u, m);
  }
  return out;
}

void write_instance_file(const std::string& path,
                         const GeneratedInstance& inst) {
  nlohmann::json j = {{"format", "aspal-instance-v1"},
                      {"spec", inst.spec},
                      {"metadata", inst.metadata}};
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open instance file for write: " + path);
  os << j.dump(2) << "\n";
  if (!os) throw std::runtime_error("write failed: " + path);
}

GeneratedInstance read_instance_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open instance file: " + path);
  nlohmann::json j = nlohmann::json::parse(is);
  if (j.value("format", std::string{}) != "aspal-instance-v1")
    throw std::runtime_error("not an instance file: " + path);
  return generate(j.at("spec").get<GenSpec>());
}

AspalConfig default_solver_config(const GenSpec& spec) {
  AspalConfig cfg;
  switch (spec.family) {
    case Family::QpSimplex:
    case Family::QpBox:
      require(spec.m_f > 0, "qp defaults need m_f > 0");
      cfg.c1 = 1;
      cfg.lambda_bar = 20.0 / spec.m_f;
      cfg.M0_initial = 100;
      cfg.stepsize_doubling.acg_iter_threshold = 75;
      break;
    case Family::Qsdp:
      require(spec.m_f > 0, "qsdp defaults need m_f > 0");
      cfg.c1 = 1;
      cfg.lambda_bar = 1.0 / (20.0 * spec.m_f);
      cfg.M0_initial = 100;
      cfg.stepsize_doubling.acg_iter_threshold = 75;
      break;
    case Family::SparsePca:
      require(spec.b_mcp > 0, "spca defaults need b > 0");
      cfg.c1 = 1;
      cfg.lambda_bar = 0.5 * spec.b_mcp;  // 1/(2 m_f) with m_f = 1/b
      cfg.M0_initial = 1;
      cfg.stepsize_doubling.acg_iter_threshold = 4;
      break;
    case Family::Bmc: {
      require(spec.upsilon > 0 && spec.tau_m > 0 && spec.theta > 0,
              "bmc defaults need positive penalty parameters");
      const double m_f = 2 * spec.upsilon * spec.tau_m / (spec.theta * spec.theta);
      cfg.c1 = 500;
      cfg.lambda_bar = 10.0 / m_f;
      cfg.M0_initial = 1;
      cfg.stepsize_doubling.acg_iter_threshold = 4;
      break;
    }
  }
  return cfg;
}

}  // namespace aspal
