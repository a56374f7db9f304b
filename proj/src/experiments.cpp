#include "qsm/experiments.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace qsm {

namespace {

using nlohmann::json;

const std::set<std::string> kCommands{"entropy", "smooth",   "duality",    "decouple",
                                      "merge",   "converse", "convergence"};
const std::set<std::string> kStochastic{"decouple", "merge"};

PureState three_qubit(const std::vector<cxd>& amps) {
  SystemLayout l({Factor{"A", 2}, Factor{"B", 2}, Factor{"R", 2}});
  Vec v(8);
  for (int i = 0; i < 8; ++i) v(i) = amps[i];
  v /= v.norm();
  return PureState(std::move(l), std::move(v));
}

std::string csv_path(const ExperimentConfig& c, const std::string& stem) {
  return c.out_dir + "/" + stem + ".csv";
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write output file: " + path);
  out << body;
}

struct EntropyRow {
  std::string state_id, quantity, conditioning;
  double value_bits = 0.0;
  std::string method;
  double gap = 0.0;
};

std::string entropy_csv(const std::vector<EntropyRow>& rows) {
  std::ostringstream os;
  os << "state_id,quantity,conditioning,value_bits,method,gap\n";
  for (const auto& r : rows)
    os << r.state_id << "," << r.quantity << "," << r.conditioning << ","
       << format_value(r.value_bits) << "," << r.method << "," << format_value(r.gap) << "\n";
  return os.str();
}

struct Tripartite {
  PureState psi;
  std::vector<std::string> a{"A"}, b{"B"}, r{"R"};
  DensityOperator rho_ar, rho_ab, rho_r, rho_b;
};

Tripartite prepare(const PureState& psi) {
  Tripartite t;
  t.psi = psi;
  for (const auto& req : {"A", "B", "R"})
    if (!psi.layout.has(req))
      throw ValidationError(std::string("experiments expect factors A, B, R; missing ") + req);
  t.rho_ar = reduced_density(psi, {"A", "R"});
  t.rho_ab = reduced_density(psi, {"A", "B"});
  t.rho_r = reduced_density(psi, {"R"});
  t.rho_b = reduced_density(psi, {"B"});
  return t;
}

}  // namespace

std::string toolkit_version() { return "0.1.0"; }

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

PureState builtin_state(const std::string& name) {
  if (name == "bell") {
    SystemLayout l({Factor{"A", 2}, Factor{"B", 1}, Factor{"R", 2}});
    Vec v = Vec::Zero(4);
    v(0) = 1.0 / std::sqrt(2.0);  // |0,0>
    v(3) = 1.0 / std::sqrt(2.0);  // |1,1>
    return PureState(std::move(l), std::move(v));
  }
  if (name == "ghz") {
    return three_qubit({1, 0, 0, 0, 0, 0, 0, 1});
  }
  if (name == "product") {
    // |0>_A (x) Bell_BR
    return three_qubit({1, 0, 0, 1, 0, 0, 0, 0});
  }
  if (name == "w") {
    return three_qubit({0, 1, 1, 0, 1, 0, 0, 0});
  }
  throw ValidationError("unknown builtin state '" + name + "'");
}

std::vector<std::string> builtin_names() { return {"bell", "ghz", "product", "w"}; }

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: parse error: ") + e.what());
  }
  ExperimentConfig c;
  c.command = j.value("command", "");
  c.state = j.value("state", "");
  c.state_id = j.value("state_id", c.state);
  c.eps = j.value("eps", 0.1);
  c.block_size = j.value("L", 0);
  c.k_override = j.value("K", 0L);
  c.l_override = j.value("L_target", 0L);
  c.samples = j.value("samples", 2000);
  c.runs = j.value("runs", 1);
  c.n_max = j.value("n_max", 2);
  c.mode = j.value("mode", "nonsmooth");
  if (j.contains("seed")) c.seed = j.at("seed").get<uint64_t>();
  c.out_dir = j.value("out", ".");
  return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

void ExperimentConfig::validate() const {
  if (!kCommands.count(command))
    throw ValidationError("config: unknown command '" + command + "'");
  if (state.empty()) throw ValidationError("config: missing state");
  bool is_builtin = false;
  for (const auto& n : builtin_names()) is_builtin |= n == state;
  if (!is_builtin) {
    std::ifstream probe(state);
    if (!probe) throw ValidationError("config: state '" + state + "' is neither builtin nor a readable file");
  }
  if (kStochastic.count(command) && !seed.has_value())
    throw ValidationError("config: command '" + command + "' requires a seed");
  if (command == "merge" || command == "smooth" || command == "converse" ||
      command == "convergence") {
    if (eps < 0.0 || eps >= 1.0) throw ValidationError("config: eps must lie in [0, 1)");
  }
  if (samples < 1) throw ValidationError("config: samples must be >= 1");
  if (runs < 1) throw ValidationError("config: runs must be >= 1");
  if (mode != "nonsmooth" && mode != "smooth" && mode != "corollary")
    throw ValidationError("config: unknown mode '" + mode + "'");
}

namespace {

PureState resolve_state(const ExperimentConfig& c) {
  for (const auto& n : builtin_names())
    if (c.state == n) return builtin_state(n);
  LoadedState s = load_state(c.state);
  if (std::holds_alternative<PureState>(s)) return std::get<PureState>(s);
  throw ValidationError("experiments need a pure tripartite state; got a density operator");
}

std::string run_entropy(const ExperimentConfig& c, const Tripartite& t) {
  std::vector<EntropyRow> rows;
  EntropyValue hmin_ar = h_min_cond(t.rho_ar, {"R"});
  rows.push_back({c.state_id, "h_min_cond", "R", hmin_ar.bits, to_string(hmin_ar.method),
                  hmin_ar.gap});
  rows.push_back({c.state_id, "h_max_cond", "B", h_max_cond(t.rho_ab, {"B"}), "closed-form", 0.0});
  EntropyValue hrel = h_min_rel(t.rho_ar, t.rho_r);
  rows.push_back({c.state_id, "h_min_rel_rhoR", "R", hrel.bits, to_string(hrel.method), 0.0});
  EntropyValue h2 = h2_rel(t.rho_ar, t.rho_r);
  rows.push_back({c.state_id, "h2_rel_rhoR", "R", h2.bits, to_string(h2.method), 0.0});
  rows.push_back({c.state_id, "vn_cond", "B", cond_von_neumann(t.rho_ab, {"B"}), "closed-form",
                  0.0});
  rows.push_back({c.state_id, "vn_cond", "R", cond_von_neumann(t.rho_ar, {"R"}), "closed-form",
                  0.0});
  DensityOperator rho_a = partial_trace(t.rho_ab, {"A"});
  rows.push_back({c.state_id, "h_min", "", h_min(rho_a), "closed-form", 0.0});
  rows.push_back({c.state_id, "h_max", "", h_max(rho_a), "closed-form", 0.0});
  return entropy_csv(rows);
}

std::string run_smooth(const ExperimentConfig& c, const Tripartite& t) {
  std::vector<EntropyRow> rows;
  EntropyValue at_zero = h_min_smooth_cond(t.rho_ar, {"R"}, 0.0);
  rows.push_back({c.state_id, "h_min_smooth_cond", "R", at_zero.bits, "sdp", at_zero.gap});
  EntropyValue smooth = h_min_smooth_cond(t.rho_ar, {"R"}, c.eps);
  rows.push_back({c.state_id, "h_min_smooth_cond_eps", "R", smooth.bits, "sdp", smooth.gap});
  SmoothMaxResult smax = h_max_smooth_rel(t.rho_ab, t.rho_b, c.eps);
  rows.push_back({c.state_id, "h_max_smooth_rel_upper", "B", smax.upper_bits, "heuristic", 0.0});
  return entropy_csv(rows);
}

std::string run_duality(const ExperimentConfig& c, const Tripartite& t) {
  std::vector<EntropyRow> rows;
  EntropyValue hmin = h_min_rel(t.rho_ar, t.rho_r);
  double hmax = h_max_cond(t.rho_ab, {"B"});
  double gap = duality_gap(t.psi, t.a, t.b, t.r);
  rows.push_back({c.state_id, "h_min_rel_rhoR", "R", hmin.bits, to_string(hmin.method), 0.0});
  rows.push_back({c.state_id, "h_max_cond", "B", hmax, "closed-form", 0.0});
  rows.push_back({c.state_id, "duality_gap", "", gap, "eigen", 0.0});
  return entropy_csv(rows);
}

std::string run_decouple(const ExperimentConfig& c, const Tripartite& t) {
  std::ostringstream os;
  os << "d_A,L,N,state_id,samples,mean,stderr,bound_h2,bound_hmin,margin\n";
  const int da = t.rho_ar.layout.factor(t.rho_ar.layout.index_of("A")).dim;
  std::vector<int> ls;
  if (c.block_size > 0)
    ls.push_back(c.block_size);
  else
    for (int l = 1; l <= da; ++l) ls.push_back(l);
  Rng rng(*c.seed);
  uint64_t cell = 0;
  for (int l : ls) {
    DecouplingReport rep =
        estimate_decoupling(t.rho_ar, "A", t.rho_r, l, c.samples, rng.child(cell++));
    os << rep.d_a << "," << rep.block_size << "," << rep.n_blocks << "," << c.state_id << ","
       << rep.samples << "," << format_value(rep.mean) << "," << format_value(rep.stderr_) << ","
       << format_value(rep.bound_h2) << "," << format_value(rep.bound_hmin) << ","
       << format_value(rep.margin) << "\n";
  }
  return os.str();
}

std::string run_merge(const ExperimentConfig& c, const Tripartite& t) {
  std::ostringstream os;
  os << "state_id,seed,K,L,cost_bits,design_eps,condition_value,error,guarantee,"
        "lower_bound_at_error,slack\n";
  CostPlan::Mode mode = c.mode == "smooth"      ? CostPlan::Mode::smooth
                        : c.mode == "corollary" ? CostPlan::Mode::corollary
                                                : CostPlan::Mode::nonsmooth;
  CostPlan plan = plan_cost(t.rho_ar, {"R"}, c.eps, mode);
  long k = c.k_override > 0 ? c.k_override : plan.k;
  long l = c.l_override > 0 ? c.l_override : plan.l;
  for (int run_ix = 0; run_ix < c.runs; ++run_ix) {
    MergeTask task;
    task.psi = t.psi;
    task.a_labels = t.a;
    task.b_labels = t.b;
    task.r_labels = t.r;
    task.k = k;
    task.l = l;
    task.eps_design = c.eps;
    task.seed = *c.seed + static_cast<uint64_t>(run_ix);
    MergeOutcome res = run_protocol(task);
    double lower = eps_error_bound(t.psi, t.a, t.b, t.r,
                                   std::min(res.error, 2.0));
    os << c.state_id << "," << task.seed << "," << k << "," << l << ","
       << format_value(res.cost_bits) << "," << format_value(c.eps) << ","
       << format_value(res.condition_value) << "," << format_value(res.error) << ","
       << format_value(plan.guarantee) << "," << format_value(lower) << ","
       << format_value(res.cost_bits - lower) << "\n";
  }
  return os.str();
}

std::string run_converse(const ExperimentConfig& c, const Tripartite& t) {
  std::vector<EntropyRow> rows;
  double zero = zero_error_bound(t.psi, t.a, t.b, t.r);
  rows.push_back({c.state_id, "zero_error_bound", "R", zero, "eigen", 0.0});
  double at_eps = eps_error_bound(t.psi, t.a, t.b, t.r, c.eps);
  rows.push_back({c.state_id, "eps_error_bound", "R", at_eps, "sdp", 0.0});
  return entropy_csv(rows);
}

std::string run_convergence(const ExperimentConfig& c, const Tripartite& t) {
  std::ostringstream os;
  os << "n,eps,value_bits_per_copy,target_bits,gap\n";
  auto series = convergence_series(t.psi, t.a, t.b, t.r, c.eps, c.n_max);
  for (const auto& pt : series)
    os << pt.n << "," << format_value(pt.eps) << "," << format_value(pt.value_bits_per_copy)
       << "," << format_value(pt.target_bits) << "," << format_value(pt.gap) << "\n";
  return os.str();
}

}  // namespace

RunResult run(const ExperimentConfig& config) {
  RunResult result;
  auto t0 = std::chrono::steady_clock::now();
  try {
    config.validate();
  } catch (const std::exception& e) {
    json err{{"error", {{"kind", "config"}, {"message", e.what()}, {"operation", "validate"}}}};
    result.exit_code = 2;
    result.error_json = err.dump();
    return result;
  }
  std::string op = config.command;
  try {
    Tripartite t = prepare(resolve_state(config));
    std::string body;
    if (config.command == "entropy")
      body = run_entropy(config, t);
    else if (config.command == "smooth")
      body = run_smooth(config, t);
    else if (config.command == "duality")
      body = run_duality(config, t);
    else if (config.command == "decouple")
      body = run_decouple(config, t);
    else if (config.command == "merge")
      body = run_merge(config, t);
    else if (config.command == "converse")
      body = run_converse(config, t);
    else
      body = run_convergence(config, t);

    std::string report = csv_path(config, config.command);
    write_file(report, body);
    result.outputs.push_back(report);

    auto t1 = std::chrono::steady_clock::now();
    json manifest;
    manifest["command"] = config.command;
    manifest["state"] = config.state;
    manifest["state_id"] = config.state_id;
    manifest["eps"] = config.eps;
    manifest["samples"] = config.samples;
    manifest["runs"] = config.runs;
    manifest["n_max"] = config.n_max;
    manifest["mode"] = config.mode;
    if (config.seed) manifest["seed"] = *config.seed;
    manifest["version"] = toolkit_version();
    manifest["wall_time_s"] = std::chrono::duration<double>(t1 - t0).count();
    manifest["outputs"] = result.outputs;
    std::string mpath = config.out_dir + "/manifest.json";
    write_file(mpath, manifest.dump(2) + "\n");
    result.outputs.push_back(mpath);
  } catch (const ValidationError& e) {
    json err{{"error", {{"kind", "validation"}, {"message", e.what()}, {"operation", op}}}};
    result.exit_code = 1;
    result.error_json = err.dump();
  } catch (const std::exception& e) {
    json err{{"error", {{"kind", "numeric"}, {"message", e.what()}, {"operation", op}}}};
    result.exit_code = 1;
    result.error_json = err.dump();
  }
  return result;
}

}  // namespace qsm
