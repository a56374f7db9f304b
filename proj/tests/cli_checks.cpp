// End-to-end checks of the installed CLI binary: determinism of report
// bodies, config error handling, and state-file validation, all through the
// real process boundary.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int failures = 0;

void expect(bool ok, const std::string& what) {
  if (ok) {
    std::cout << "ok: " << what << "\n";
  } else {
    std::cout << "FAIL: " << what << "\n";
    ++failures;
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(QSM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

}  // namespace

int main() {
  fs::path work = fs::temp_directory_path() / "qsm_cli_checks";
  fs::remove_all(work);
  fs::create_directories(work);

  // determinism: merge on bell, eps 0.1, seed 7, run twice
  {
    std::ofstream(work / "merge.json")
        << R"({"command":"merge","state":"bell","eps":0.1,"seed":7,"runs":1})";
    fs::create_directories(work / "m1");
    fs::create_directories(work / "m2");
    int rc1 = run_cli("--config " + (work / "merge.json").string() + " --out " +
                      (work / "m1").string());
    int rc2 = run_cli("--config " + (work / "merge.json").string() + " --out " +
                      (work / "m2").string());
    expect(rc1 == 0 && rc2 == 0, "merge runs exit 0");
    std::string a = slurp(work / "m1" / "merge.csv");
    std::string b = slurp(work / "m2" / "merge.csv");
    expect(!a.empty() && a == b, "merge report bodies byte-identical");
  }

  // seed override changes the body
  {
    fs::create_directories(work / "m3");
    int rc = run_cli("--config " + (work / "merge.json").string() + " --seed 8 --out " +
                     (work / "m3").string());
    expect(rc == 0, "seed override accepted");
    expect(slurp(work / "m3" / "merge.csv") != slurp(work / "m1" / "merge.csv"),
           "different seed gives a different report");
  }

  // duality on ghz: small gap in the emitted row
  {
    std::ofstream(work / "dual.json") << R"({"command":"duality","state":"ghz"})";
    fs::create_directories(work / "d");
    int rc = run_cli("--config " + (work / "dual.json").string() + " --out " +
                     (work / "d").string());
    expect(rc == 0, "duality run exits 0");
    std::string body = slurp(work / "d" / "duality.csv");
    expect(body.find("duality_gap") != std::string::npos, "duality row present");
  }

  // unknown command: usage error, exit 2
  {
    std::ofstream(work / "bad.json") << R"({"command":"nope","state":"bell"})";
    int rc = run_cli("--config " + (work / "bad.json").string());
    expect(rc == 2, "unknown command exits 2");
  }

  // state file violating an invariant: nonzero exit
  {
    std::ofstream(work / "badstate.json")
        << R"({"layout":[{"label":"A","dim":2},{"label":"B","dim":1},{"label":"R","dim":1}],
            "type":"density","data":[[1.001,0],[0,0],[0,0],[-0.001,0]]})";
    std::ofstream(work / "ent.json") << R"({"command":"entropy","state":")"
                                     << (work / "badstate.json").string() << R"("})";
    int rc = run_cli("--config " + (work / "ent.json").string());
    expect(rc != 0, "invalid state file rejected");
  }

  // missing required flag
  {
    int rc = run_cli("");
    expect(rc != 0, "missing --config rejected");
  }

  if (failures) {
    std::cout << failures << " cli check(s) failed\n";
    return 1;
  }
  std::cout << "all cli checks passed\n";
  return 0;
}
