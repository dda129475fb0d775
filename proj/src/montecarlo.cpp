#include "levyml/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "levyml/error.hpp"

namespace levyml {

Domain guard_box(const Domain& d) {
  const double wv = d.b - d.a, ww = d.d - d.c;
  return {d.a - wv, d.b + wv, d.c - ww, d.d + ww};
}

PathResult em_path(State s0, const StableSpec& spec, double dt, double T, Stream& stream, const MLParams& params,
                   const Domain& domain, const std::vector<double>& snapshot_times) {
  if (!(dt > 0)) throw Error(ErrorCode::OutOfRange, "em_path needs dt > 0");
  const Domain guard = guard_box(domain);
  const auto n = static_cast<long>(std::llround(T / dt));
  PathResult out;
  out.snapshots.reserve(snapshot_times.size());
  std::vector<long> marks;
  for (double t : snapshot_times) marks.push_back(std::llround(t / dt));
  std::size_t next_mark = 0;
  auto record = [&](long k, State s) {
    while (next_mark < marks.size() && marks[next_mark] == k) {
      out.snapshots.push_back(s);
      ++next_mark;
    }
  };

  State s = s0;
  record(0, s);
  for (long k = 1; k <= n; ++k) {
    if (!out.escaped) {
      const Rates f = vector_field(s, params);
      const double jump = increment(spec, dt, stream);
      s = {s.v + f.dv * dt + jump, s.w + f.dw * dt};
      if (!(s.v > guard.a && s.v < guard.b && s.w > guard.c && s.w < guard.d)) {
        out.escaped = true;
        out.escape_time = static_cast<double>(k) * dt;
      }
    }
    record(k, s);
  }
  out.terminal = s;
  return out;
}

PathEnsemble simulate_ensemble(State s0, const StableSpec& spec, const EnsembleOptions& opt, const MLParams& params,
                               const Domain& domain) {
  if (opt.n_paths == 0) throw Error(ErrorCode::ValidationError, "n_paths must be >= 1");
  spec.validate();
  PathEnsemble ens;
  ens.n_paths = opt.n_paths;
  ens.dt = opt.dt;
  ens.seed = opt.seed;
  ens.snapshot_times = opt.snapshot_times;
  ens.snapshots.assign(opt.snapshot_times.size(), std::vector<State>(opt.n_paths));
  ens.terminal.resize(opt.n_paths);
  ens.escaped.resize(opt.n_paths);

  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      Stream stream(opt.seed, k);
      PathResult r = em_path(s0, spec, opt.dt, opt.T, stream, params, domain, opt.snapshot_times);
      for (std::size_t t = 0; t < r.snapshots.size(); ++t) ens.snapshots[t][k] = r.snapshots[t];
      ens.terminal[k] = r.terminal;
      ens.escaped[k] = r.escaped;
    }
  };
  const auto jobs = static_cast<std::size_t>(std::max(1, opt.jobs));
  if (jobs == 1) {
    run_range(0, opt.n_paths);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (opt.n_paths + jobs - 1) / jobs;
    for (std::size_t b = 0; b < opt.n_paths; b += chunk) pool.emplace_back(run_range, b, std::min(opt.n_paths, b + chunk));
  }
  return ens;
}

namespace {

const std::vector<State>& states_at(const PathEnsemble& ens, double t) {
  for (std::size_t k = 0; k < ens.snapshot_times.size(); ++k)
    if (std::abs(ens.snapshot_times[k] - t) < 0.5 * ens.dt) return ens.snapshots[k];
  std::ostringstream os;
  os << "ensemble holds no states at t=" << t;
  throw Error(ErrorCode::ValidationError, os.str());
}

// Cell index of each path (-1 when outside the interior cells).
std::vector<long> cell_indices(const std::vector<State>& states, const std::vector<std::uint8_t>& escaped,
                               const Grid& grid, const Domain& domain) {
  const AffineMap map(domain);
  const double h = grid.h();
  std::vector<long> idx(states.size(), -1);
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (escaped[k] || !domain.contains(states[k])) continue;
    const Rescaled r = map.to_rescaled(states[k]);
    // Interior cell i covers [x_i - h/2, x_i + h/2); the half cells along the
    // boundary belong to no interior node.
    const long i = std::lround((r.x + 1.0) / h) - 1;
    const long j = grid.rows_y() == 1 ? 0 : std::lround((r.y + 1.0) / h) - 1;
    if (i < 0 || i >= grid.nx() || j < 0 || j >= grid.rows_y()) continue;
    idx[k] = j * grid.nx() + i;
  }
  return idx;
}

}  // namespace

EmpiricalDensity empirical_density(const PathEnsemble& ens, const Grid& grid, const Domain& domain, double t) {
  const auto& states = states_at(ens, t);
  const auto idx = cell_indices(states, ens.escaped, grid, domain);
  EmpiricalDensity out;
  out.field.J = grid.J;
  out.field.time = t;
  out.field.values = Eigen::MatrixXd::Zero(grid.nx(), grid.rows_y());
  std::vector<std::size_t> counts(static_cast<std::size_t>(grid.nx()) * grid.rows_y(), 0);
  std::size_t inside = 0;
  for (long c : idx) {
    if (c < 0) continue;
    ++counts[static_cast<std::size_t>(c)];
    ++inside;
  }
  const double n = static_cast<double>(ens.n_paths);
  const double area = out.field.cell_area();
  for (int j = 0; j < grid.rows_y(); ++j)
    for (int i = 0; i < grid.nx(); ++i)
      out.field.values(i, j) = static_cast<double>(counts[static_cast<std::size_t>(j) * grid.nx() + i]) / (n * area);
  out.out_fraction = static_cast<double>(ens.n_paths - inside) / n;
  return out;
}

double transition_fraction(const PathEnsemble& ens, const LimitCycle& unstable) {
  if (unstable.empty()) throw Error(ErrorCode::NoCycle, "transition_fraction needs the unstable cycle");
  std::size_t rest = 0;
  for (std::size_t k = 0; k < ens.n_paths; ++k)
    if (!ens.escaped[k] && point_in_polygon(ens.terminal[k], unstable.polyline)) ++rest;
  return static_cast<double>(rest) / static_cast<double>(ens.n_paths);
}

double total_variation(const DensityField& p, const DensityField& q) {
  if (p.values.rows() != q.values.rows() || p.values.cols() != q.values.cols())
    throw Error(ErrorCode::ValidationError, "total_variation needs fields on the same grid");
  return 0.5 * (p.values - q.values).cwiseAbs().sum() * p.cell_area();
}

double histogram_bootstrap_se(const PathEnsemble& ens, const Grid& grid, const Domain& domain, double t,
                              int replicates, std::uint64_t seed) {
  const auto idx = cell_indices(states_at(ens, t), ens.escaped, grid, domain);
  const std::size_t cells = static_cast<std::size_t>(grid.nx()) * grid.rows_y();
  const double n = static_cast<double>(ens.n_paths);
  std::vector<double> sum(cells, 0.0), sum_sq(cells, 0.0);
  std::vector<std::size_t> counts(cells);
  for (int r = 0; r < replicates; ++r) {
    Stream stream(seed, static_cast<std::uint64_t>(r));
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t k = 0; k < ens.n_paths; ++k) {
      const long c = idx[static_cast<std::size_t>(stream() % ens.n_paths)];
      if (c >= 0) ++counts[static_cast<std::size_t>(c)];
    }
    for (std::size_t c = 0; c < cells; ++c) {
      const double p = static_cast<double>(counts[c]) / n;
      sum[c] += p;
      sum_sq[c] += p * p;
    }
  }
  double total_var = 0.0;
  for (std::size_t c = 0; c < cells; ++c) {
    const double mean = sum[c] / replicates;
    total_var += std::max(0.0, sum_sq[c] / replicates - mean * mean);
  }
  return std::sqrt(total_var);
}

}  // namespace levyml
