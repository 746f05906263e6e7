#include "aspal/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

namespace aspal {

namespace {

std::string fmt_g(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

std::string fmt_runtime(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}

double parse_double_field(const std::string& s, const char* what) {
  double v;
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || p != e)
    throw std::invalid_argument(std::string("bad CSV field for ") + what + ": " + s);
  return v;
}

long parse_long_field(const std::string& s, const char* what) {
  long v;
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || p != e)
    throw std::invalid_argument(std::string("bad CSV field for ") + what + ": " + s);
  return v;
}

std::uint64_t parse_u64_field(const std::string& s, const char* what) {
  std::uint64_t v;
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || p != e)
    throw std::invalid_argument(std::string("bad CSV field for ") + what + ": " + s);
  return v;
}

// GenSpec numeric fields a grid entry may sweep, in expansion order; the
// last listed field varies fastest.
struct GridField {
  const char* key;
  void (*set)(GenSpec&, double);
};

const GridField kGridFields[] = {
    {"n", [](GenSpec& s, double v) { s.n = static_cast<Index>(v); }},
    {"l", [](GenSpec& s, double v) { s.l = static_cast<Index>(v); }},
    {"m_f", [](GenSpec& s, double v) { s.m_f = v; }},
    {"L_f", [](GenSpec& s, double v) { s.L_f = v; }},
    {"r", [](GenSpec& s, double v) { s.r = v; }},
    {"density", [](GenSpec& s, double v) { s.density = v; }},
    {"k", [](GenSpec& s, double v) { s.k = static_cast<Index>(v); }},
    {"s", [](GenSpec& s, double v) { s.s = static_cast<Index>(v); }},
    {"vartheta", [](GenSpec& s, double v) { s.vartheta = v; }},
    {"b_mcp", [](GenSpec& s, double v) { s.b_mcp = v; }},
    {"upsilon", [](GenSpec& s, double v) { s.upsilon = v; }},
    {"tau_m", [](GenSpec& s, double v) { s.tau_m = v; }},
    {"theta", [](GenSpec& s, double v) { s.theta = v; }},
    {"lo", [](GenSpec& s, double v) { s.lo = v; }},
    {"hi", [](GenSpec& s, double v) { s.hi = v; }},
    {"seed", [](GenSpec& s, double v) { s.seed = static_cast<std::uint64_t>(v); }},
};

// Cartesian product of a grid entry's array-valued fields; scalar values just
// overwrite the default. Expansion order follows kGridFields with the last
// field innermost, so "seed" varies fastest.
void expand_grid(const nlohmann::json& grid, std::vector<GenSpec>& out) {
  GenSpec base;
  base.family = family_from_name(grid.at("family").get<std::string>());
  if (grid.contains("ratings_path"))
    base.ratings_path = grid.at("ratings_path").get<std::string>();
  for (const auto& f : kGridFields)
    if (grid.contains(f.key) && !grid.at(f.key).is_array())
      f.set(base, grid.at(f.key).get<double>());
  for (const auto& [key, value] : grid.items()) {
    if (key == "family" || key == "ratings_path") continue;
    const bool known =
        std::any_of(std::begin(kGridFields), std::end(kGridFields),
                    [&](const GridField& f) { return key == f.key; });
    if (!known) throw std::invalid_argument("unknown grid key: " + key);
  }
  std::vector<GenSpec> acc{base};
  for (const auto& f : kGridFields) {
    if (!grid.contains(f.key) || !grid.at(f.key).is_array()) continue;
    const auto& values = grid.at(f.key);
    if (values.empty()) throw std::invalid_argument(std::string("empty grid axis: ") + f.key);
    std::vector<GenSpec> next;
    next.reserve(acc.size() * values.size());
    for (const GenSpec& s : acc)
      for (const auto& v : values) {
        GenSpec t = s;
        f.set(t, v.get<double>());
        next.push_back(std::move(t));
      }
    acc = std::move(next);
  }
  out.insert(out.end(), acc.begin(), acc.end());
}

struct Cell {
  std::size_t index;      // row index in the output
  const GenSpec* spec;
  Tolerances tol;
  const AspalConfig* cfg;
  std::string trace_path;
};

}  // namespace

std::string csv_header() {
  return "family,n,l,m_f,L_f,extra_params,seed,status,outer_iters,acg_iters,"
         "resolvents,runtime_s,rho_rel,eta_rel";
}

std::string to_csv_row(const BenchRecord& r) {
  std::ostringstream os;
  os << r.family << ',' << r.n << ',' << r.l << ',' << fmt_g(r.m_f) << ','
     << fmt_g(r.L_f) << ',' << r.extra_params << ',' << r.seed << ','
     << r.status << ',' << r.outer_iters << ',' << r.acg_iters << ','
     << r.resolvents << ',' << fmt_runtime(r.runtime_s) << ','
     << fmt_g(r.rho_rel) << ',' << fmt_g(r.eta_rel);
  return os.str();
}

CsvContents read_csv(std::istream& is) {
  CsvContents out;
  std::string line;
  if (!std::getline(is, line))
    throw std::invalid_argument("empty CSV: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != csv_header())
    throw std::invalid_argument("unexpected CSV header: " + line);
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("ATR=", 0) == 0) {
      out.atr = parse_double_field(line.substr(4), "ATR");
      break;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() != 14)
      throw std::invalid_argument("CSV row with " + std::to_string(f.size()) +
                                  " fields: " + line);
    BenchRecord r;
    r.family = f[0];
    r.n = parse_long_field(f[1], "n");
    r.l = parse_long_field(f[2], "l");
    r.m_f = parse_double_field(f[3], "m_f");
    r.L_f = parse_double_field(f[4], "L_f");
    r.extra_params = f[5];
    r.seed = parse_u64_field(f[6], "seed");
    r.status = f[7];
    r.outer_iters = parse_long_field(f[8], "outer_iters");
    r.acg_iters = parse_long_field(f[9], "acg_iters");
    r.resolvents = parse_long_field(f[10], "resolvents");
    r.runtime_s = parse_double_field(f[11], "runtime_s");
    r.rho_rel = parse_double_field(f[12], "rho_rel");
    r.eta_rel = parse_double_field(f[13], "eta_rel");
    out.rows.push_back(std::move(r));
  }
  return out;
}

CsvContents read_csv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open CSV file: " + path);
  return read_csv(is);
}

BenchConfig parse_bench_config(const nlohmann::json& j) {
  BenchConfig cfg;
  if (j.contains("instances"))
    for (const auto& spec : j.at("instances"))
      cfg.instances.push_back(spec.get<GenSpec>());
  if (j.contains("grids"))
    for (const auto& grid : j.at("grids")) expand_grid(grid, cfg.instances);
  if (j.contains("grid")) expand_grid(j.at("grid"), cfg.instances);
  if (cfg.instances.empty())
    throw std::invalid_argument("bench config defines no instances");
  if (j.contains("tolerances")) {
    for (const auto& t : j.at("tolerances")) {
      Tolerances tol;
      tol.rho_hat = t.value("rho_hat", tol.rho_hat);
      tol.eta_hat = t.value("eta_hat", tol.eta_hat);
      cfg.tolerances.push_back(tol);
    }
  }
  if (cfg.tolerances.empty()) cfg.tolerances.push_back(Tolerances{});
  cfg.time_limit_s = j.value("time_limit_s", cfg.time_limit_s);
  cfg.solver_overrides = j.value("solver", nlohmann::json::object());
  if (j.contains("solver_b")) cfg.solver_overrides_b = j.at("solver_b");
  cfg.trace_dir = j.value("trace_dir", std::string{});
  return cfg;
}

BenchConfig read_bench_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open bench config: " + path);
  return parse_bench_config(nlohmann::json::parse(is));
}

AspalConfig apply_solver_overrides(AspalConfig base, const nlohmann::json& j) {
  for (const auto& [key, value] : j.items()) {
    if (key == "sigma") base.sigma = value.get<double>();
    else if (key == "chi") base.chi = value.get<double>();
    else if (key == "beta") base.beta = value.get<double>();
    else if (key == "lambda_bar") base.lambda_bar = value.get<double>();
    else if (key == "c1") base.c1 = value.get<double>();
    else if (key == "mu_inner") base.mu_inner = value.get<double>();
    else if (key == "M0_initial") base.M0_initial = value.get<double>();
    else if (key == "doubling") base.stepsize_doubling.enabled = value.get<bool>();
    else if (key == "acg_iter_threshold")
      base.stepsize_doubling.acg_iter_threshold = value.get<long>();
    else if (key == "fixed_lambda") base.fixed_lambda = value.get<double>();
    else if (key == "absolute_residuals") base.absolute_residuals = value.get<bool>();
    else if (key == "max_outer_iters") base.max_outer_iters = value.get<long>();
    else if (key == "inner_max_iters") base.inner_max_iters = value.get<long>();
    else if (key == "lambda_max") base.lambda_max = value.get<double>();
    else if (key == "lambda_min") base.lambda_min = value.get<double>();
    else throw std::invalid_argument("unknown solver override: " + key);
  }
  return base;
}

BenchRecord run_instance(const GenSpec& spec, const Tolerances& tol,
                         const AspalConfig& cfg, const std::string& trace_path) {
  GeneratedInstance inst = generate(spec);
  const std::optional<double> m_f =
      inst.spec.m_f > 0 ? std::optional<double>(inst.spec.m_f) : std::nullopt;
  SolveRun run = solve_traced(inst.problem, tol, cfg, m_f);
  if (!trace_path.empty()) write_trace_file(trace_path, run.trace);

  BenchRecord rec;
  rec.family = family_name(inst.spec.family);
  rec.n = inst.spec.n;
  rec.l = inst.spec.l;
  rec.m_f = inst.spec.m_f;
  rec.L_f = inst.spec.L_f;
  rec.extra_params = extra_params(inst.spec);
  rec.seed = inst.spec.seed;
  rec.status = to_string(run.certificate.status);
  rec.outer_iters = run.certificate.counters.outer_iters;
  rec.acg_iters = run.certificate.counters.acg_iters;
  rec.resolvents = run.certificate.counters.resolvents;
  rec.runtime_s = run.certificate.runtime_s;
  rec.rho_rel = run.certificate.rho_rel;
  rec.eta_rel = run.certificate.eta_rel;
  return rec;
}

int default_jobs() {
  if (const char* env = std::getenv("ASPAL_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v >= 1) return static_cast<int>(v);
  }
  return 1;
}

BenchOutput run_bench(const BenchConfig& config, int jobs, std::ostream* csv) {
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  const std::size_t arms = config.solver_overrides_b ? 2 : 1;
  const std::size_t per_arm = config.instances.size() * config.tolerances.size();

  // Per-cell solver configs are resolved up front so workers share nothing
  // mutable; row order is arm-major, then instance, then tolerance.
  std::vector<AspalConfig> configs;
  std::vector<Cell> cells;
  configs.reserve(arms * per_arm);
  cells.reserve(arms * per_arm);
  for (std::size_t arm = 0; arm < arms; ++arm) {
    const nlohmann::json& overrides = arm == 0
                                          ? config.solver_overrides
                                          : *config.solver_overrides_b;
    for (std::size_t i = 0; i < config.instances.size(); ++i) {
      for (std::size_t t = 0; t < config.tolerances.size(); ++t) {
        AspalConfig sc = apply_solver_overrides(
            default_solver_config(config.instances[i]), overrides);
        sc.time_limit_s = config.time_limit_s;
        configs.push_back(sc);
        Cell cell;
        cell.index = cells.size();
        cell.spec = &config.instances[i];
        cell.tol = config.tolerances[t];
        if (!config.trace_dir.empty()) {
          cell.trace_path = config.trace_dir + "/" +
                            family_name(config.instances[i].family) + "_i" +
                            std::to_string(i) + "_t" + std::to_string(t) +
                            (arm == 1 ? "_b" : "") + ".trace.jsonl";
        }
        cells.push_back(std::move(cell));
      }
    }
  }
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i].cfg = &configs[i];

  BenchOutput out;
  out.rows.resize(cells.size());
  std::vector<std::string> errors(cells.size());
  std::atomic<std::size_t> next{0};
  // A failing cell becomes a status="Error" row and the run continues; only
  // configuration problems (caught above, before the pool starts) abort.
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        out.rows[cells[i].index] =
            run_instance(*cells[i].spec, cells[i].tol, *cells[i].cfg,
                         cells[i].trace_path);
      } catch (const std::exception& e) {
        BenchRecord rec;
        rec.family = family_name(cells[i].spec->family);
        rec.n = cells[i].spec->n;
        rec.l = cells[i].spec->l;
        rec.m_f = cells[i].spec->m_f;
        rec.L_f = cells[i].spec->L_f;
        rec.extra_params = extra_params(*cells[i].spec);
        rec.seed = cells[i].spec->seed;
        rec.status = "Error";
        out.rows[cells[i].index] = std::move(rec);
        errors[i] = std::string("row ") + std::to_string(cells[i].index) +
                    ": " + e.what();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const std::size_t count = std::min<std::size_t>(jobs, cells.size());
    pool.reserve(count);
    for (std::size_t i = 0; i < count; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& msg : errors)
    if (!msg.empty()) out.errors.push_back(std::move(msg));

  if (arms == 2) {
    double sum = 0;
    long pairs = 0;
    const char* converged = to_string(SolveStatus::Converged);
    for (std::size_t i = 0; i < per_arm; ++i) {
      const BenchRecord& a = out.rows[i];
      const BenchRecord& b = out.rows[per_arm + i];
      if (a.status == converged && b.status == converged && b.runtime_s > 0) {
        sum += a.runtime_s / b.runtime_s;
        ++pairs;
      }
    }
    if (pairs > 0) out.atr = sum / pairs;
  }

  if (csv) {
    *csv << csv_header() << "\n";
    for (const auto& r : out.rows) *csv << to_csv_row(r) << "\n";
    if (out.atr) *csv << "ATR=" << fmt_g(*out.atr) << "\n";
    csv->flush();
  }
  return out;
}

std::string format_summary(const BenchOutput& out) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "family" << std::right << std::setw(7)
     << "n" << std::setw(7) << "l" << std::setw(10) << "m_f" << std::setw(10)
     << "L_f" << std::setw(12) << "seed" << std::setw(11) << "status"
     << std::setw(8) << "outer" << std::setw(9) << "acg" << std::setw(10)
     << "resolv" << std::setw(12) << "runtime_s" << std::setw(11) << "rho_rel"
     << std::setw(11) << "eta_rel" << "\n";
  for (const auto& r : out.rows) {
    const bool ok = r.status == to_string(SolveStatus::Converged);
    os << std::left << std::setw(12) << r.family << std::right << std::setw(7)
       << r.n << std::setw(7) << r.l << std::setw(10) << fmt_g(r.m_f)
       << std::setw(10) << fmt_g(r.L_f) << std::setw(12) << r.seed
       << std::setw(11) << r.status;
    if (ok) {
      os << std::setw(8) << r.outer_iters << std::setw(9) << r.acg_iters
         << std::setw(10) << r.resolvents << std::setw(12)
         << fmt_runtime(r.runtime_s);
    } else {
      os << std::setw(8) << "*" << std::setw(9) << "*" << std::setw(10) << "*"
         << std::setw(12) << "*";
    }
    char rho[32], eta[32];
    std::snprintf(rho, sizeof(rho), "%.3g", r.rho_rel);
    std::snprintf(eta, sizeof(eta), "%.3g", r.eta_rel);
    os << std::setw(11) << rho << std::setw(11) << eta << "\n";
  }
  if (out.atr) os << "ATR=" << fmt_g(*out.atr) << "\n";
  return os.str();
}

}  // namespace aspal
