#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qsm/experiments.hpp"
#include "test_helpers.hpp"

using namespace qsm;
using namespace qsm::test;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("qsm_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& body) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(body);
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_SUITE_BEGIN("experiments");

TEST_CASE("builtin states are valid and named") {
  for (const auto& name : builtin_names()) {
    PureState psi = builtin_state(name);
    psi.validate();
    CHECK(psi.layout.has("A"));
    CHECK(psi.layout.has("B"));
    CHECK(psi.layout.has("R"));
  }
  CHECK_THROWS_AS(builtin_state("epr"), ValidationError);

  // bell: Phi_2 across A|R with trivial B
  PureState bell = builtin_state("bell");
  CHECK(bell.layout.dim_of({"B"}) == 1);
  DensityOperator rho_a = reduced_density(bell, {"A"});
  CHECK(max_abs_diff(rho_a.matrix, 0.5 * Mat::Identity(2, 2)) < 1e-12);
}

TEST_CASE("config validation rejects bad input before computing") {
  ExperimentConfig c;
  c.command = "teleport";
  c.state = "bell";
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("unknown command"), ValidationError);

  c.command = "duality";
  c.state = "no_such_state";
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("neither builtin"), ValidationError);

  c.state = "bell";
  c.command = "merge";
  c.seed.reset();
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("requires a seed"), ValidationError);

  c.seed = 1;
  c.eps = 1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);

  ExperimentConfig ok = ExperimentConfig::from_json_text(
      R"({"command":"duality","state":"ghz","out":"."})");
  CHECK_NOTHROW(ok.validate());
}

TEST_CASE("duality run emits the entropy schema with a tiny gap") {
  fs::path dir = fresh_dir("duality");
  ExperimentConfig c;
  c.command = "duality";
  c.state = "ghz";
  c.state_id = "ghz";
  c.out_dir = dir.string();
  RunResult r = run(c);
  REQUIRE(r.exit_code == 0);
  auto rows = parse_csv(slurp((dir / "duality.csv").string()));
  REQUIRE(rows.size() >= 2);
  CHECK(rows[0] == std::vector<std::string>{"state_id", "quantity", "conditioning", "value_bits",
                                            "method", "gap"});
  bool found = false;
  for (const auto& row : rows)
    if (row.size() == 6 && row[1] == "duality_gap") {
      found = true;
      CHECK(std::abs(std::stod(row[3])) <= 1e-7);
    }
  CHECK(found);
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(slurp((dir / "manifest.json").string()).find("wall_time_s") != std::string::npos);
}

TEST_CASE("merge run is deterministic for a fixed seed") {
  fs::path d1 = fresh_dir("merge1");
  fs::path d2 = fresh_dir("merge2");
  ExperimentConfig c;
  c.command = "merge";
  c.state = "bell";
  c.state_id = "bell";
  c.eps = 0.1;
  c.seed = 7;
  c.runs = 2;
  c.out_dir = d1.string();
  RunResult r1 = run(c);
  REQUIRE(r1.exit_code == 0);
  c.out_dir = d2.string();
  RunResult r2 = run(c);
  REQUIRE(r2.exit_code == 0);
  std::string b1 = slurp((d1 / "merge.csv").string());
  std::string b2 = slurp((d2 / "merge.csv").string());
  CHECK(b1 == b2);
  auto rows = parse_csv(b1);
  CHECK(rows[0] == std::vector<std::string>{"state_id", "seed", "K", "L", "cost_bits",
                                            "design_eps", "condition_value", "error", "guarantee",
                                            "lower_bound_at_error", "slack"});
  REQUIRE(rows.size() == 3);
  // converse bound respected on every emitted run
  for (size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::stod(rows[i][10]) >= -1e-6);  // slack = cost - lower bound
    CHECK(std::stod(rows[i][7]) <= 2.0 + 1e-9);
  }
}

TEST_CASE("decouple run sweeps L and stays deterministic") {
  fs::path d1 = fresh_dir("dec1");
  ExperimentConfig c;
  c.command = "decouple";
  c.state = "bell";
  c.state_id = "bell";
  c.samples = 50;
  c.seed = 11;
  c.out_dir = d1.string();
  RunResult r = run(c);
  REQUIRE(r.exit_code == 0);
  std::string body = slurp((d1 / "decouple.csv").string());
  auto rows = parse_csv(body);
  CHECK(rows[0] == std::vector<std::string>{"d_A", "L", "N", "state_id", "samples", "mean",
                                            "stderr", "bound_h2", "bound_hmin", "margin"});
  REQUIRE(rows.size() == 3);  // L = 1, 2 for d_A = 2

  fs::path d2 = fresh_dir("dec2");
  c.out_dir = d2.string();
  RunResult r2 = run(c);
  REQUIRE(r2.exit_code == 0);
  CHECK(body == slurp((d2 / "decouple.csv").string()));
}

TEST_CASE("convergence run emits the series schema") {
  fs::path dir = fresh_dir("conv");
  ExperimentConfig c;
  c.command = "convergence";
  c.state = "ghz";
  c.state_id = "ghz";
  c.eps = 0.05;
  c.n_max = 2;
  c.out_dir = dir.string();
  RunResult r = run(c);
  REQUIRE(r.exit_code == 0);
  auto rows = parse_csv(slurp((dir / "convergence.csv").string()));
  CHECK(rows[0] ==
        std::vector<std::string>{"n", "eps", "value_bits_per_copy", "target_bits", "gap"});
  REQUIRE(rows.size() == 3);
  CHECK(std::stod(rows[1][3]) == doctest::Approx(0.0));  // S(A|R) for ghz
}

TEST_CASE("state files: validation diagnostics and round trip") {
  fs::path dir = fresh_dir("states");

  // PSD violation of 1e-3 is rejected with a named diagnostic
  std::string bad = R"({"layout":[{"label":"A","dim":2},{"label":"B","dim":1},
    {"label":"R","dim":1}],"type":"density",
    "data":[[1.001,0],[0,0],[0,0],[-0.001,0]]})";
  std::ofstream((dir / "bad.json")) << bad;
  ExperimentConfig c;
  c.command = "entropy";
  c.state = (dir / "bad.json").string();
  RunResult r = run(c);
  CHECK(r.exit_code != 0);
  CHECK(r.error_json.find("positivity") != std::string::npos);

  // truncated file: parse error
  std::ofstream((dir / "trunc.json")) << "{\"layout\": [";
  CHECK_THROWS_WITH_AS(load_state((dir / "trunc.json").string()),
                       doctest::Contains("parse error"), ValidationError);

  // non-unit trace names "trace"
  std::string off = R"({"layout":[{"label":"A","dim":2}],"type":"density",
    "data":[[0.9,0],[0,0],[0,0],[0.0,0]]})";
  std::ofstream((dir / "off.json")) << off;
  CHECK_THROWS_WITH_AS(load_state((dir / "off.json").string()), doctest::Contains("trace"),
                       ValidationError);

  // save/load round trip is exact
  PureState psi = builtin_state("w");
  save_state(psi, (dir / "w.json").string());
  LoadedState back = load_state((dir / "w.json").string());
  REQUIRE(std::holds_alternative<PureState>(back));
  CHECK((std::get<PureState>(back).vector - psi.vector).norm() == 0.0);
}

TEST_CASE("every command runs on a builtin state") {
  for (const std::string& cmd : {"entropy", "smooth", "duality", "converse"}) {
    fs::path dir = fresh_dir("cmd_" + cmd);
    ExperimentConfig c;
    c.command = cmd;
    c.state = "w";
    c.state_id = "w";
    c.eps = 0.1;
    c.out_dir = dir.string();
    RunResult r = run(c);
    REQUIRE_MESSAGE(r.exit_code == 0, cmd, ": ", r.error_json);
    REQUIRE(fs::exists(dir / (cmd + ".csv")));
    auto rows = parse_csv(slurp((dir / (cmd + ".csv")).string()));
    CHECK(rows.size() >= 2);
    CHECK(rows[0][0] == "state_id");
  }

  // converse rows agree with the module-level bounds
  fs::path dir = fresh_dir("cmd_conv2");
  ExperimentConfig c;
  c.command = "converse";
  c.state = "bell";
  c.state_id = "bell";
  c.eps = 0.04;
  c.out_dir = dir.string();
  REQUIRE(run(c).exit_code == 0);
  auto rows = parse_csv(slurp((dir / "converse.csv").string()));
  bool saw_zero = false;
  for (const auto& row : rows) {
    if (row[1] == "zero_error_bound") {
      saw_zero = true;
      CHECK(std::stod(row[3]) == doctest::Approx(1.0).epsilon(1e-7));
    }
  }
  CHECK(saw_zero);
}

TEST_CASE("unknown command yields a config error object") {
  ExperimentConfig c = ExperimentConfig::from_json_text(
      R"({"command":"frobnicate","state":"bell"})");
  RunResult r = run(c);
  CHECK(r.exit_code == 2);
  CHECK(r.error_json.find("config") != std::string::npos);
}

TEST_SUITE_END();
