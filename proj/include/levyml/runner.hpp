#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "levyml/config.hpp"

namespace levyml {

struct RunResult {
  std::vector<std::string> files;     // relative to the output directory, manifest excluded
  std::vector<std::string> warnings;  // e.g. failed phase-diagram cells
};

/// Executes config.kind, writing artifacts and manifest.json into
/// config.output_dir. Progress goes to `log`. Module errors propagate.
RunResult run(const RunConfig& config, std::ostream& log);

}  // namespace levyml
