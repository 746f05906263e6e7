#include "aspal/bench.hpp"
#include "aspal/generators.hpp"
#include "aspal/solver.hpp"
#include "aspal/trace.hpp"
#include "aspal/verify.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using nlohmann::json;

int cmd_generate(const std::string& spec_path, const std::string& out_path) {
  std::ifstream is(spec_path);
  if (!is) throw std::runtime_error("cannot open spec file: " + spec_path);
  const aspal::GenSpec spec = json::parse(is).get<aspal::GenSpec>();
  const aspal::GeneratedInstance inst = aspal::generate(spec);
  aspal::write_instance_file(out_path, inst);
  std::cout << "wrote " << out_path << "\n" << inst.metadata.dump(2) << "\n";
  return 0;
}

struct SolveFlags {
  double rho = 1e-4, eta = 1e-4, time_limit = 120.0;
  std::string trace_path, csv_path;
  std::optional<double> fixed_lambda;
  bool no_doubling = false, absolute = false;
};

int cmd_solve(const std::string& inst_path, const SolveFlags& flags) {
  const aspal::GeneratedInstance inst = aspal::read_instance_file(inst_path);
  aspal::AspalConfig cfg = aspal::default_solver_config(inst.spec);
  cfg.time_limit_s = flags.time_limit;
  cfg.fixed_lambda = flags.fixed_lambda;
  cfg.absolute_residuals = flags.absolute;
  if (flags.no_doubling) cfg.stepsize_doubling.enabled = false;

  const aspal::Tolerances tol{flags.rho, flags.eta};
  const aspal::BenchRecord rec =
      aspal::run_instance(inst.spec, tol, cfg, flags.trace_path);

  std::cout << aspal::csv_header() << "\n" << aspal::to_csv_row(rec) << "\n";
  if (!flags.csv_path.empty()) {
    const bool fresh = !std::filesystem::exists(flags.csv_path) ||
                       std::filesystem::file_size(flags.csv_path) == 0;
    std::ofstream os(flags.csv_path, std::ios::app);
    if (!os) throw std::runtime_error("cannot open CSV for append: " + flags.csv_path);
    if (fresh) os << aspal::csv_header() << "\n";
    os << aspal::to_csv_row(rec) << "\n";
  }
  return rec.status == aspal::to_string(aspal::SolveStatus::Converged) ? 0 : 2;
}

int cmd_bench(const std::string& config_path, const std::string& out_csv,
              int jobs) {
  const aspal::BenchConfig config = aspal::read_bench_config_file(config_path);
  if (!config.trace_dir.empty())
    std::filesystem::create_directories(config.trace_dir);

  aspal::BenchOutput out;
  if (out_csv.empty()) {
    out = aspal::run_bench(config, jobs);
  } else {
    std::ofstream os(out_csv);
    if (!os) throw std::runtime_error("cannot open CSV for write: " + out_csv);
    out = aspal::run_bench(config, jobs, &os);
  }
  std::cout << aspal::format_summary(out);
  for (const auto& msg : out.errors) std::cerr << "error: " << msg << "\n";

  const char* converged = aspal::to_string(aspal::SolveStatus::Converged);
  for (const auto& r : out.rows)
    if (r.status != converged) return 2;
  return 0;
}

int cmd_verify(const std::string& trace_path) {
  const aspal::Trace trace = aspal::read_trace_file(trace_path);
  const aspal::VerificationReport report = aspal::check_trace(trace);
  std::cout << aspal::format_report(report);
  return report.pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive proximal augmented-Lagrangian solver and benchmark harness"};
  app.require_subcommand(1);

  std::string gen_spec, gen_out;
  CLI::App* gen = app.add_subcommand("generate", "Generate a problem instance from a spec");
  gen->add_option("spec", gen_spec, "GenSpec JSON file")->required();
  gen->add_option("-o,--output", gen_out, "Instance file to write")->required();

  std::string solve_inst;
  SolveFlags flags;
  double fixed_lambda_value = 0;
  CLI::App* solve = app.add_subcommand("solve", "Solve an instance file");
  solve->add_option("instance", solve_inst, "Instance JSON file")->required();
  solve->add_option("--rho", flags.rho, "Stationarity tolerance");
  solve->add_option("--eta", flags.eta, "Feasibility tolerance");
  solve->add_option("--time-limit", flags.time_limit, "Wall-clock limit in seconds");
  solve->add_option("--trace", flags.trace_path, "Write a JSONL trace here");
  solve->add_option("-o,--output", flags.csv_path, "Append the result row to this CSV");
  CLI::Option* fixed =
      solve->add_option("--fixed-lambda", fixed_lambda_value,
                        "Disable stepsize adaption and use this value");
  solve->add_flag("--no-doubling", flags.no_doubling, "Disable the stepsize-doubling heuristic");
  solve->add_flag("--absolute", flags.absolute, "Use absolute instead of relative residuals");

  std::string bench_config, bench_out;
  int jobs = aspal::default_jobs();
  CLI::App* bench = app.add_subcommand("bench", "Run a benchmark grid");
  bench->add_option("config", bench_config, "BenchConfig JSON file")->required();
  bench->add_option("-o,--output", bench_out, "CSV file to write");
  bench->add_option("--jobs", jobs, "Parallel solves (default: ASPAL_JOBS or 1)");

  std::string verify_trace;
  CLI::App* verify = app.add_subcommand("verify", "Check a solver trace's invariants");
  verify->add_option("--trace", verify_trace, "Trace JSONL file")->required();

  try {
    app.parse(argc, argv);
    if (fixed->count() > 0) flags.fixed_lambda = fixed_lambda_value;
    if (gen->parsed()) return cmd_generate(gen_spec, gen_out);
    if (solve->parsed()) return cmd_solve(solve_inst, flags);
    if (bench->parsed()) return cmd_bench(bench_config, bench_out, jobs);
    if (verify->parsed()) return cmd_verify(verify_trace);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
