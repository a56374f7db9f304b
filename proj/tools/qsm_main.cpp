// Seeded, config-driven experiment runner. All knobs live in the JSON config;
// --seed/--out/--samples override the matching config fields.

#include <CLI11.hpp>
#include <iostream>
#include <optional>

#include "qsm/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"qsm - single-shot state merging experiment runner"};
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> samples;
  app.add_option("--config", config_path, "JSON experiment config")->required();
  app.add_option("--seed", seed, "override config seed");
  app.add_option("--out", out_dir, "override output directory");
  app.add_option("--samples", samples, "override sample count");
  CLI11_PARSE(app, argc, argv);

  qsm::ExperimentConfig cfg;
  try {
    cfg = qsm::ExperimentConfig::from_json_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << R"({"error":{"kind":"config","message":")" << e.what() << R"(","operation":"load"}})"
              << std::endl;
    return 2;
  }
  if (seed) cfg.seed = *seed;
  if (out_dir) cfg.out_dir = *out_dir;
  if (samples) cfg.samples = *samples;

  qsm::RunResult res = qsm::run(cfg);
  if (res.exit_code != 0) {
    std::cerr << res.error_json << std::endl;
    return res.exit_code;
  }
  for (const auto& f : res.outputs) std::cout << f << "\n";
  return 0;
}
