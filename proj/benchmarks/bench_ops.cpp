#include <aspal/adap_fista.hpp>
#include <aspal/generators.hpp>
#include <aspal/problem.hpp>
#include <aspal/prox.hpp>
#include <aspal/rng.hpp>
#include <aspal/solver.hpp>

#include <benchmark/benchmark.h>

#include <memory>

// Microbenchmarks for the hot paths: projections, the inner accelerated
// solve, augmented-Lagrangian evaluation, and a small end-to-end run.
namespace {

using namespace aspal;

Vector random_vector(Index n, std::uint64_t seed, double lo = -2.0,
                     double hi = 2.0) {
  Rng rng(seed);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

Matrix random_sym(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix M(n, n);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c) M(r, c) = rng.uniform(-2.0, 2.0);
  return 0.5 * (M + M.transpose()).eval();
}

SmoothOracle convex_quadratic(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix G(n, n);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c) G(r, c) = rng.gaussian();
  auto H = std::make_shared<Matrix>(Matrix::Identity(n, n) +
                                    (G.transpose() * G) /
                                        static_cast<double>(n));
  auto g = std::make_shared<Vector>(random_vector(n, seed + 1));
  SmoothOracle f;
  f.value = [H, g](const Vector& x) { return 0.5 * x.dot(*H * x) + g->dot(x); };
  f.gradient = [H, g](const Vector& x) { return Vector(*H * x + *g); };
  return f;
}

void BM_ProjectSimplex(benchmark::State& state) {
  const Vector v = random_vector(state.range(0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(project_simplex(v));
}
BENCHMARK(BM_ProjectSimplex)->Arg(100)->Arg(1000)->Arg(10000);

void BM_ProjectCappedSimplex(benchmark::State& state) {
  const Vector v = random_vector(state.range(0), 2);
  const double k = static_cast<double>(state.range(0)) / 4.0;
  for (auto _ : state) benchmark::DoNotOptimize(project_capped_simplex(v, k));
}
BENCHMARK(BM_ProjectCappedSimplex)->Arg(100)->Arg(1000);

void BM_ProjectSpectraplex(benchmark::State& state) {
  const Matrix M = random_sym(state.range(0), 3);
  for (auto _ : state) benchmark::DoNotOptimize(project_spectraplex(M));
}
BENCHMARK(BM_ProjectSpectraplex)->Arg(20)->Arg(50)->Arg(100);

void BM_ProxNuclear(benchmark::State& state) {
  Rng rng(4);
  const Index rows = state.range(0), cols = (3 * state.range(0)) / 4;
  Matrix M(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) M(r, c) = rng.uniform(-1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(prox_nuclear(M, 0.5));
}
BENCHMARK(BM_ProxNuclear)->Arg(40)->Arg(120);

void BM_AugLagrangian(benchmark::State& state) {
  GenSpec spec;
  spec.family = Family::QpSimplex;
  spec.n = state.range(0);
  spec.l = 10;
  spec.m_f = 10.0;
  spec.L_f = 100.0;
  spec.seed = 5;
  const GeneratedInstance inst = generate(spec);
  const Vector p = random_vector(spec.l, 6);
  for (auto _ : state)
    benchmark::DoNotOptimize(eval_al(inst.problem.z0, p, 8.0, inst.problem));
}
BENCHMARK(BM_AugLagrangian)->Arg(100)->Arg(400);

void BM_AdapFistaSolve(benchmark::State& state) {
  const Index n = state.range(0);
  const SmoothOracle psi_s = convex_quadratic(n, 7);
  const ProxOracle psi_n = make_simplex_prox(n);
  const Vector x0 = Vector::Constant(n, 1.0 / static_cast<double>(n));
  AdapFistaConfig cfg;
  cfg.mu = 1.0;
  cfg.L0 = 2.0;
  cfg.sigma = 1e-6;
  long resolvents = 0;
  for (auto _ : state) {
    const AdapFistaResult res = adap_fista(psi_s, psi_n, x0, cfg);
    resolvents = res.resolvents;
    benchmark::DoNotOptimize(res.y);
  }
  state.counters["resolvents"] = static_cast<double>(resolvents);
}
BENCHMARK(BM_AdapFistaSolve)->Arg(50)->Arg(200);

void BM_SolveQpSimplex(benchmark::State& state) {
  GenSpec spec;
  spec.family = Family::QpSimplex;
  spec.n = state.range(0);
  spec.l = 6;
  spec.m_f = 5.0;
  spec.L_f = 40.0;
  spec.seed = 8;
  const GeneratedInstance inst = generate(spec);
  const AspalConfig cfg = default_solver_config(spec);
  long acg = 0;
  for (auto _ : state) {
    const SolutionCertificate cert =
        solve(inst.problem, Tolerances{1e-3, 1e-3}, cfg);
    acg = cert.counters.acg_iters;
    benchmark::DoNotOptimize(cert.z);
  }
  state.counters["acg_iters"] = static_cast<double>(acg);
}
BENCHMARK(BM_SolveQpSimplex)->Arg(40)->Arg(80);

}  // namespace

BENCHMARK_MAIN();
