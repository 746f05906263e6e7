#pragma once

#include "aspal/generators.hpp"
#include "aspal/solver.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace aspal {

// One benchmark row. Everything except runtime_s is deterministic for a
// given (spec, tolerance, solver config).
struct BenchRecord {
  std::string family;
  Index n = 0, l = 0;
  double m_f = 0, L_f = 0;
  std::string extra_params;
  std::uint64_t seed = 0;
  std::string status;
  long outer_iters = 0, acg_iters = 0, resolvents = 0;
  double runtime_s = 0;
  double rho_rel = std::nan("");
  double eta_rel = std::nan("");
};

std::string csv_header();
std::string to_csv_row(const BenchRecord& r);
// Rows until EOF or the "ATR=" footer; the header line is required.
struct CsvContents {
  std::vector<BenchRecord> rows;
  std::optional<double> atr;
};
CsvContents read_csv(std::istream& is);
CsvContents read_csv_file(const std::string& path);

// Benchmark configuration: a family grid (cartesian product, documented
// order) or an explicit instance list, × tolerance settings, optionally a
// second solver arm for runtime-ratio comparison.
struct BenchConfig {
  std::vector<GenSpec> instances;
  std::vector<Tolerances> tolerances;
  double time_limit_s = 120.0;
  nlohmann::json solver_overrides;                 // applied over defaults
  std::optional<nlohmann::json> solver_overrides_b;  // comparison arm
  std::string trace_dir;  // when set, one trace file per row is written here
};
BenchConfig parse_bench_config(const nlohmann::json& j);
BenchConfig read_bench_config_file(const std::string& path);

// Config-table overrides applied on top of per-family defaults.
AspalConfig apply_solver_overrides(AspalConfig base, const nlohmann::json& j);

// Solve one instance; runtime_s measures solve() only.
BenchRecord run_instance(const GenSpec& spec, const Tolerances& tol,
                         const AspalConfig& cfg,
                         const std::string& trace_path = {});

struct BenchOutput {
  std::vector<BenchRecord> rows;
  // Mean runtime ratio arm-a/arm-b over mutually converged pairs; present
  // only when the config has a comparison arm and at least one such pair.
  std::optional<double> atr;
  // One message per failed row (status "Error"); the run continues past
  // per-row failures.
  std::vector<std::string> errors;
};

// Runs every (instance × tolerance [× arm]) cell, `jobs` at a time; rows come
// back in deterministic grid order regardless of scheduling. Writes CSV (with
// ATR footer when present) to `csv` when non-null.
BenchOutput run_bench(const BenchConfig& config, int jobs,
                      std::ostream* csv = nullptr);

// Thread-count default: ASPAL_JOBS env var, else 1.
int default_jobs();

// Human-readable summary table; non-converged rows are marked with '*'.
std::string format_summary(const BenchOutput& out);

}  // namespace aspal
