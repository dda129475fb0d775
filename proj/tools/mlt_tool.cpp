// mlt-tool <kind> --config <path> [--seed N] [--out DIR] [--jobs K]

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <iostream>

#include "levyml/config.hpp"
#include "levyml/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Levy-noise Morris-Lecar toolkit"};
  std::string kind, config_path, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  app.add_option("kind", kind, "phase-portrait | density | mlt | phase-diagram | mc-check")->required();
  app.add_option("--config", config_path, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "global seed");
  app.add_option("--out", out, "output directory");
  app.add_option("--jobs", jobs, "worker threads for sweeps and ensembles")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    levyml::RunConfig cfg = levyml::parse_config(config_path);
    cfg.kind = levyml::parse_run_kind(kind);
    if (seed) cfg.seed = *seed;
    if (!out.empty()) cfg.output_dir = out;
    if (jobs) cfg.jobs = *jobs;
    if (const char* cap = std::getenv("MLT_JOBS")) {
      const int k = std::atoi(cap);
      if (k >= 1) cfg.jobs = std::min(cfg.jobs, k);
    }
    const levyml::RunResult r = levyml::run(cfg, std::cerr);
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
