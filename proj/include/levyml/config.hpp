#pragma once

// Run configuration: one JSON document with nested blocks. Unknown keys are
// rejected and every invalid field is reported by its dotted path.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "levyml/domain.hpp"
#include "levyml/fp_solver.hpp"
#include "levyml/mlt.hpp"
#include "levyml/model.hpp"
#include "levyml/montecarlo.hpp"

namespace levyml {

enum class RunKind { PhasePortrait, Density, Mlt, PhaseDiagram, McCheck };

std::string to_string(RunKind k);
RunKind parse_run_kind(const std::string& s);  // throws ParseError

/// Named pairs of starting points used by mlt and phase-diagram runs.
enum class StartPair { Stable, Unstable };

std::string to_string(StartPair p);
std::array<State, 2> start_states(StartPair p);

struct NoiseBlock {
  double alpha = 0.5;
  double sigma = 0.25;
  std::vector<double> alphas;  // sweep lists, phase-diagram only
  std::vector<double> sigmas;

  bool operator==(const NoiseBlock&) const = default;
};

struct SolverBlock {
  int J = 100;
  std::optional<double> dt;  // unset: automatic
  double T = 100.0;
  double snapshot_interval = 0.5;
  std::vector<double> snapshot_times;  // density runs: only these are written
  bool absorbing_exterior = true;

  bool operator==(const SolverBlock&) const = default;
};

struct MltBlock {
  State start{-32.7, 0.4578};  // density run start
  std::vector<StartPair> start_pairs{StartPair::Stable, StartPair::Unstable};
  int dwell = 5;

  bool operator==(const MltBlock&) const = default;
};

struct McBlock {
  std::size_t n_paths = 100000;
  double dt = 0.005;
  double T = 1.0;
  int J = 100;  // comparison grid

  bool operator==(const McBlock&) const = default;
};

struct RunConfig {
  RunKind kind = RunKind::PhasePortrait;
  MLParams model;
  Domain domain;
  NoiseBlock noise;
  SolverBlock solver;
  MltBlock mlt;
  McBlock mc;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  int jobs = 1;

  bool operator==(const RunConfig&) const = default;

  /// (alpha, sigma) cells of a phase-diagram run: the cartesian product of the
  /// sweep lists, falling back to the scalar values.
  std::vector<std::pair<double, double>> sweep_plan() const;

  /// Solver settings for a single (alpha, sigma).
  SolverConfig solver_config(double alpha, double sigma) const;
};

/// Every violated rule as "path: message"; empty when valid.
std::vector<std::string> validation_errors(const RunConfig& c);

/// Throws ValidationError listing every entry of validation_errors.
void validate(const RunConfig& c);

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::filesystem::path& path);

/// Full document with every field spelled out; parse_config_text inverts it.
std::string emit_config(const RunConfig& c);

}  // namespace levyml
