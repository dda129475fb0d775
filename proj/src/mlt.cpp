#include "levyml/mlt.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "levyml/error.hpp"

namespace levyml {

namespace {

// Vertex offset of the parabola through (-1, lo), (0, mid), (1, hi).
double parabola_offset(double lo, double mid, double hi) {
  const double curvature = lo - 2.0 * mid + hi;
  if (!(curvature < 0.0)) return 0.0;
  return std::clamp(0.5 * (lo - hi) / curvature, -0.5, 0.5);
}

}  // namespace

Peak argmax_density(const DensityField& P, const Domain& domain) {
  const Eigen::MatrixXd& m = P.values;
  const Eigen::Index nx = m.rows(), ny = m.cols();
  double best = 0.0;
  Eigen::Index bi = -1, bj = -1;
  bool tie = false;
  // i-major scan with strict comparison keeps the lexicographically smallest maximiser.
  for (Eigen::Index i = 0; i < nx; ++i) {
    for (Eigen::Index j = 0; j < ny; ++j) {
      const double v = m(i, j);
      if (v > best) {
        best = v;
        bi = i;
        bj = j;
        tie = false;
      } else if (v == best && bi >= 0) {
        tie = true;
      }
    }
  }
  if (bi < 0) {
    std::ostringstream os;
    os << "no positive density at t=" << P.time;
    throw Error(ErrorCode::DegenerateField, os.str());
  }
  auto at = [&](Eigen::Index i, Eigen::Index j) {
    return (i < 0 || i >= nx || j < 0 || j >= ny) ? 0.0 : m(i, j);
  };
  const Grid grid{P.J, static_cast<int>(ny) == 2 * P.J - 1 ? 0 : static_cast<int>(ny)};
  const double h = grid.h();
  Peak peak;
  peak.i = static_cast<int>(bi);
  peak.j = static_cast<int>(bj);
  peak.pmax = best;
  peak.tie = tie;
  peak.rescaled.x = grid.x(peak.i) + h * parabola_offset(at(bi - 1, bj), best, at(bi + 1, bj));
  peak.rescaled.y = ny == 1 ? 0.0 : grid.y(peak.j) + h * parabola_offset(at(bi, bj - 1), best, at(bi, bj + 1));
  peak.location = AffineMap(domain).to_state(peak.rescaled);
  return peak;
}

MLTrajectory extract_mlt(std::span<const DensityField> snapshots, const Domain& domain) {
  if (snapshots.empty()) throw Error(ErrorCode::DegenerateField, "no snapshots");
  MLTrajectory mlt;
  const AffineMap map(domain);
  const double quarter_diameter = 0.25 * 2.0 * std::sqrt(2.0);
  for (const DensityField& field : snapshots) {
    const Peak peak = argmax_density(field, domain);
    if (!mlt.samples.empty() && field.time <= mlt.samples.back().t)
      throw Error(ErrorCode::ValidationError, "snapshot times must increase");
    if (peak.tie) mlt.tie_times.push_back(field.time);
    if (!mlt.samples.empty()) {
      const Rescaled prev = map.to_rescaled(mlt.samples.back().location);
      if (std::hypot(peak.rescaled.x - prev.x, peak.rescaled.y - prev.y) >= quarter_diameter)
        mlt.switch_times.push_back(field.time);
    }
    mlt.samples.push_back({field.time, peak.location, peak.pmax});
  }
  return mlt;
}

TransitionVerdict classify_transition(const MLTrajectory& mlt, const LimitCycle& unstable,
                                      const TransitionOptions& opt) {
  int run = 0;
  std::size_t run_start = 0;
  Basin last = Basin::Oscillate;
  for (std::size_t k = 0; k < mlt.samples.size(); ++k) {
    last = classify_basin(mlt.samples[k].location, unstable, opt.band, opt.metric);
    if (last == Basin::Rest) {
      if (run++ == 0) run_start = k;
      if (run >= opt.dwell) return {Transition::ToRest, mlt.samples[run_start].t};
    } else {
      run = 0;
    }
  }
  // An interior run cut off by the deadline cannot be confirmed either way.
  if (last == Basin::Ambiguous || run > 0) return {Transition::Undecided, std::nullopt};
  return {Transition::StayOscillate, std::nullopt};
}

char mark_symbol(Mark m) {
  switch (m) {
    case Mark::O: return 'o';
    case Mark::X: return 'x';
    case Mark::Plus: return '+';
    case Mark::Failed: return '!';
  }
  return '?';
}

Mark combine(const TransitionVerdict& first, const TransitionVerdict& second) {
  const bool a = first.tag == Transition::ToRest;
  const bool b = second.tag == Transition::ToRest;
  if (a && b) return Mark::X;
  if (!a && !b) return Mark::O;
  return Mark::Plus;
}

TransitionVerdict run_verdict(const SolverConfig& config, State s0, const LimitCycle& unstable,
                              const TransitionOptions& opt, MLTrajectory* mlt_out) {
  const Solution sol = solve_any(config, s0);
  MLTrajectory mlt = extract_mlt(sol.snapshots, config.domain);
  const TransitionVerdict verdict = classify_transition(mlt, unstable, opt);
  if (mlt_out) *mlt_out = std::move(mlt);
  return verdict;
}

PhaseDiagram phase_diagram(std::span<const double> alphas, std::span<const double> sigmas, const LimitCycle& unstable,
                           const SweepOptions& opt) {
  PhaseDiagram pd;
  pd.alphas.assign(alphas.begin(), alphas.end());
  pd.sigmas.assign(sigmas.begin(), sigmas.end());
  std::sort(pd.alphas.begin(), pd.alphas.end());
  std::sort(pd.sigmas.begin(), pd.sigmas.end());
  const std::size_t n_cells = pd.alphas.size() * pd.sigmas.size();
  pd.cells.resize(n_cells);

  // One job per (cell, start); results land in disjoint slots.
  struct Job {
    std::optional<TransitionVerdict> verdict;
    std::string error;
  };
  std::vector<Job> jobs(2 * n_cells);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      const std::size_t cell = k / 2;
      SolverConfig cfg = opt.base;
      cfg.noise.alpha = pd.alphas[cell / pd.sigmas.size()];
      cfg.noise.sigma = pd.sigmas[cell % pd.sigmas.size()];
      try {
        jobs[k].verdict = run_verdict(cfg, opt.starts[k % 2], unstable, opt.transition);
      } catch (const std::exception& e) {
        jobs[k].error = e.what();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(opt.jobs, static_cast<int>(jobs.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  for (std::size_t c = 0; c < n_cells; ++c) {
    PhaseCell& cell = pd.cells[c];
    cell.alpha = pd.alphas[c / pd.sigmas.size()];
    cell.sigma = pd.sigmas[c % pd.sigmas.size()];
    const Job& a = jobs[2 * c];
    const Job& b = jobs[2 * c + 1];
    if (a.verdict && b.verdict) {
      cell.verdicts = {*a.verdict, *b.verdict};
      cell.mark = combine(*a.verdict, *b.verdict);
    } else {
      cell.mark = Mark::Failed;
      cell.error = a.error.empty() ? b.error : a.error;
    }
  }
  return pd;
}

}  // namespace levyml
