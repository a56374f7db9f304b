#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qsm/merging.hpp"
#include "qsm/serialize.hpp"

namespace qsm {

// Built-in tripartite states, all on factors A, B, R:
//   bell    : Phi_2 across A|R with trivial B
//   ghz     : (|000> + |111>)/sqrt(2)
//   product : |0>_A (x) Bell_{BR}
//   w       : (|100> + |010> + |001>)/sqrt(3)
PureState builtin_state(const std::string& name);
std::vector<std::string> builtin_names();

struct ExperimentConfig {
  std::string command;       // entropy | smooth | duality | decouple | merge | converse | convergence
  std::string state;         // builtin name or file path
  std::string state_id;      // reporting name; defaults to the state spec
  double eps = 0.1;
  int block_size = 0;        // L; 0 = sweep every L <= d_A (decouple)
  long k_override = 0;       // merge: use this K instead of the plan
  long l_override = 0;
  int samples = 2000;
  int runs = 1;              // merge: number of seeded runs
  int n_max = 2;
  std::string mode = "nonsmooth";
  std::optional<uint64_t> seed;
  std::string out_dir = ".";

  static ExperimentConfig from_json_file(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text);
  void validate() const;  // rejects unknown command/state before any computation
};

struct RunResult {
  int exit_code = 0;
  std::vector<std::string> outputs;  // files written
  std::string error_json;            // non-empty on failure
};

// Executes the configured experiment, writing CSV report(s) plus a JSON
// manifest into out_dir. Byte-identical CSV bodies for identical
// (config, seed); wall time lives only in the manifest.
RunResult run(const ExperimentConfig& config);

std::string toolkit_version();

// CSV cell formatting used everywhere: 12 significant digits.
std::string format_value(double v);

}  // namespace qsm
