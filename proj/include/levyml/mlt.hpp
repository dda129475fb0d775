#pragma once

// Maximal likely trajectories: the path of the density maximiser over time,
// its basin verdict, and (alpha, sigma) sweeps of those verdicts.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "levyml/fp_solver.hpp"
#include "levyml/model.hpp"

namespace levyml {

struct Peak {
  State location;    // (v, w), sub-cell refined
  Rescaled rescaled;
  double pmax = 0.0;  // grid maximum value
  int i = 0;
  int j = 0;
  bool tie = false;  // another node attains the same maximum
};

/// Grid argmax with ties resolved to the smallest (i, j), refined by a
/// three-point parabola along each axis. Throws DegenerateField if no value is positive.
Peak argmax_density(const DensityField& P, const Domain& domain);

struct MLTSample {
  double t = 0.0;
  State location;
  double pmax = 0.0;
};

struct MLTrajectory {
  std::vector<MLTSample> samples;
  std::vector<double> tie_times;     // snapshots whose argmax was tied
  std::vector<double> switch_times;  // jumps longer than a quarter of the domain diameter
};

MLTrajectory extract_mlt(std::span<const DensityField> snapshots, const Domain& domain);

enum class Transition { StayOscillate, ToRest, Undecided };

struct TransitionVerdict {
  Transition tag = Transition::StayOscillate;
  std::optional<double> decision_time;  // set iff ToRest

  bool operator==(const TransitionVerdict&) const = default;
};

struct TransitionOptions {
  int dwell = 5;      // consecutive interior samples needed
  double band = 0.0;  // ambiguous band (rescaled units); <= 0 uses the cycle resolution
  Domain metric;
};

/// ToRest once the MLT sits strictly inside the unstable cycle for `dwell`
/// consecutive samples; Undecided when no such run occurred and the last
/// sample is ambiguous or starts an interior run shorter than `dwell`;
/// StayOscillate otherwise.
TransitionVerdict classify_transition(const MLTrajectory& mlt, const LimitCycle& unstable,
                                      const TransitionOptions& opt = {});

enum class Mark { O, X, Plus, Failed };

char mark_symbol(Mark m);  // 'o', 'x', '+', '!'

struct PhaseCell {
  double alpha = 0.0;
  double sigma = 0.0;
  Mark mark = Mark::Failed;
  std::array<TransitionVerdict, 2> verdicts{};
  std::string error;
};

struct PhaseDiagram {
  std::vector<double> alphas;
  std::vector<double> sigmas;
  std::vector<PhaseCell> cells;  // alpha-major: cells[a * sigmas.size() + s]

  const PhaseCell& at(std::size_t a, std::size_t s) const { return cells[a * sigmas.size() + s]; }
};

/// O when neither trajectory enters the rest basin, X when both do, Plus when split.
Mark combine(const TransitionVerdict& first, const TransitionVerdict& second);

struct SweepOptions {
  SolverConfig base;  // grid, domain, params, T, cadence; alpha/sigma overwritten per cell
  std::array<State, 2> starts{};
  TransitionOptions transition;
  int jobs = 1;
};

/// Runs both starts for every (alpha, sigma) pair; alpha == 2 uses the
/// Brownian solver. Cell failures are recorded and the sweep continues.
PhaseDiagram phase_diagram(std::span<const double> alphas, std::span<const double> sigmas, const LimitCycle& unstable,
                           const SweepOptions& opt);

/// Solve + MLT + verdict for one start.
TransitionVerdict run_verdict(const SolverConfig& config, State s0, const LimitCycle& unstable,
                              const TransitionOptions& opt, MLTrajectory* mlt_out = nullptr);

}  // namespace levyml
