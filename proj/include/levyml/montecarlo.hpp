#pragma once

// Euler-Maruyama ensembles of the stochastic Morris-Lecar system with
// alpha-stable increments on v; an independent check on the FP solver.

#include <cstdint>
#include <vector>

#include "levyml/fp_solver.hpp"
#include "levyml/model.hpp"
#include "levyml/rng.hpp"
#include "levyml/stable.hpp"

namespace levyml {

/// Box three times the size of `domain`, centred on it.
Domain guard_box(const Domain& domain);

struct PathResult {
  State terminal;
  bool escaped = false;
  double escape_time = 0.0;
  std::vector<State> snapshots;  // one per requested time
};

/// Drift * dt plus a stable increment on v, deterministic Euler on w. Paths
/// leaving the guard box are frozen and tagged escaped.
PathResult em_path(State s0, const StableSpec& spec, double dt, double T, Stream& stream, const MLParams& params,
                   const Domain& domain, const std::vector<double>& snapshot_times = {});

struct EnsembleOptions {
  std::size_t n_paths = 100000;
  double dt = 0.005;
  double T = 1.0;
  std::uint64_t seed = 1;
  std::vector<double> snapshot_times;  // T is always recorded as terminal
  int jobs = 1;
};

struct PathEnsemble {
  std::size_t n_paths = 0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> snapshot_times;
  std::vector<std::vector<State>> snapshots;  // [time][path]
  std::vector<State> terminal;
  std::vector<std::uint8_t> escaped;
};

/// Path k draws from Stream(seed, k), so results do not depend on `jobs`.
PathEnsemble simulate_ensemble(State s0, const StableSpec& spec, const EnsembleOptions& opt, const MLParams& params,
                               const Domain& domain);

struct EmpiricalDensity {
  DensityField field;
  double out_fraction = 0.0;  // escaped or outside the domain
};

/// Histogram on the FP grid cells at snapshot time t, scaled to a density.
EmpiricalDensity empirical_density(const PathEnsemble& ensemble, const Grid& grid, const Domain& domain, double t);

/// Fraction of paths whose terminal state lies inside the unstable cycle.
double transition_fraction(const PathEnsemble& ensemble, const LimitCycle& unstable);

/// 0.5 * sum |p - q| * cell area.
double total_variation(const DensityField& p, const DensityField& q);

/// Bootstrap standard error of the histogram at time t: sqrt of the summed
/// per-cell variance of the cell probabilities over `replicates` resamples.
double histogram_bootstrap_se(const PathEnsemble& ensemble, const Grid& grid, const Domain& domain, double t,
                              int replicates, std::uint64_t seed);

}  // namespace levyml
