#include "aspal/trace.hpp"

#include "aspal/problem.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace aspal {

using nlohmann::json;

namespace {

json header_to_json(const TraceHeader& h) {
  json j{{"type", "header"},
         {"rho_hat", h.rho_hat},
         {"eta_hat", h.eta_hat},
         {"rho_for_delta", h.rho_for_delta},
         {"sigma", h.sigma},
         {"chi", h.chi},
         {"beta", h.beta},
         {"lambda_bar", h.lambda_bar},
         {"c1", h.c1},
         {"mu_inner", h.mu_inner},
         {"doubling_enabled", h.doubling_enabled},
         {"acg_iter_threshold", h.acg_iter_threshold},
         {"absolute_residuals", h.absolute_residuals},
         {"grad0_norm", h.grad0_norm},
         {"feas0_norm", h.feas0_norm},
         {"affine", h.affine}};
  if (h.fixed_lambda) j["fixed_lambda"] = *h.fixed_lambda;
  if (h.m_f) j["m_f"] = *h.m_f;
  return j;
}

TraceHeader header_from_json(const json& j) {
  TraceHeader h;
  j.at("rho_hat").get_to(h.rho_hat);
  j.at("eta_hat").get_to(h.eta_hat);
  j.at("rho_for_delta").get_to(h.rho_for_delta);
  j.at("sigma").get_to(h.sigma);
  j.at("chi").get_to(h.chi);
  j.at("beta").get_to(h.beta);
  j.at("lambda_bar").get_to(h.lambda_bar);
  j.at("c1").get_to(h.c1);
  j.at("mu_inner").get_to(h.mu_inner);
  j.at("doubling_enabled").get_to(h.doubling_enabled);
  j.at("acg_iter_threshold").get_to(h.acg_iter_threshold);
  j.at("absolute_residuals").get_to(h.absolute_residuals);
  j.at("grad0_norm").get_to(h.grad0_norm);
  j.at("feas0_norm").get_to(h.feas0_norm);
  j.at("affine").get_to(h.affine);
  if (j.contains("fixed_lambda")) h.fixed_lambda = j["fixed_lambda"].get<double>();
  if (j.contains("m_f")) h.m_f = j["m_f"].get<double>();
  return h;
}

// NaN is not representable in JSON; sentinel null round-trips it.
json num(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

double num_from(const json& j) {
  if (j.is_null()) return std::nan("");
  return j.get<double>();
}

json record_to_json(const TraceRecord& r) {
  return json{{"type", "iter"},
              {"k", r.k},
              {"lambda", r.lambda},
              {"c", r.c},
              {"w_norm", r.w_norm},
              {"feas_norm", r.feas_norm},
              {"acg_iters", r.acg_iters},
              {"resolvents", r.resolvents},
              {"accepted_acg_iters", r.accepted_acg_iters},
              {"al", r.al},
              {"al_prev_p", r.al_prev_p},
              {"p_norm", r.p_norm},
              {"dp_norm", r.dp_norm},
              {"u_norm", r.u_norm},
              {"step_norm", r.step_norm},
              {"k_hat", r.k_hat},
              {"anchor_al", num(r.anchor_al)},
              {"delta", num(r.delta)},
              {"delta_threshold", num(r.delta_threshold)},
              {"penalty_doubled", r.penalty_doubled},
              {"halvings", r.halvings},
              {"lambda_doubled", r.lambda_doubled},
              {"rho_rel", num(r.rho_rel)},
              {"eta_rel", num(r.eta_rel)}};
}

TraceRecord record_from_json(const json& j) {
  TraceRecord r;
  j.at("k").get_to(r.k);
  j.at("lambda").get_to(r.lambda);
  j.at("c").get_to(r.c);
  j.at("w_norm").get_to(r.w_norm);
  j.at("feas_norm").get_to(r.feas_norm);
  j.at("acg_iters").get_to(r.acg_iters);
  j.at("resolvents").get_to(r.resolvents);
  j.at("accepted_acg_iters").get_to(r.accepted_acg_iters);
  j.at("al").get_to(r.al);
  j.at("al_prev_p").get_to(r.al_prev_p);
  j.at("p_norm").get_to(r.p_norm);
  j.at("dp_norm").get_to(r.dp_norm);
  j.at("u_norm").get_to(r.u_norm);
  j.at("step_norm").get_to(r.step_norm);
  j.at("k_hat").get_to(r.k_hat);
  r.anchor_al = num_from(j.at("anchor_al"));
  r.delta = num_from(j.at("delta"));
  r.delta_threshold = num_from(j.at("delta_threshold"));
  j.at("penalty_doubled").get_to(r.penalty_doubled);
  j.at("halvings").get_to(r.halvings);
  j.at("lambda_doubled").get_to(r.lambda_doubled);
  r.rho_rel = num_from(j.at("rho_rel"));
  r.eta_rel = num_from(j.at("eta_rel"));
  return r;
}

}  // namespace

void write_trace_jsonl(std::ostream& os, const Trace& trace) {
  os << header_to_json(trace.header).dump() << '\n';
  for (const TraceRecord& r : trace.records) {
    os << record_to_json(r).dump() << '\n';
  }
}

Trace read_trace_jsonl(std::istream& is) {
  Trace trace;
  std::string line;
  bool have_header = false;
  long line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      throw std::invalid_argument("trace line " + std::to_string(line_no) +
                                  ": not valid JSON");
    }
    std::string type = j.value("type", "");
    if (type == "header") {
      trace.header = header_from_json(j);
      have_header = true;
    } else if (type == "iter") {
      trace.records.push_back(record_from_json(j));
    } else {
      throw std::invalid_argument("trace line " + std::to_string(line_no) +
                                  ": unknown record type");
    }
  }
  if (!have_header) {
    throw std::invalid_argument("trace stream has no header record");
  }
  return trace;
}

void write_trace_file(const std::string& path, const Trace& trace) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open trace file for writing: " + path);
  write_trace_jsonl(os, trace);
}

Trace read_trace_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open trace file: " + path);
  return read_trace_jsonl(is);
}

}  // namespace aspal
