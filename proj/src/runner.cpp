#include "levyml/runner.hpp"

#include <chrono>
#include <cstdio>

#include "levyml/error.hpp"
#include "levyml/io.hpp"
#include "levyml/montecarlo.hpp"

namespace levyml {

namespace {

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string time_tag(double t) { return fmt("%07.2f", t); }

const char* verdict_name(Transition t) {
  switch (t) {
    case Transition::StayOscillate: return "StayOscillate";
    case Transition::ToRest: return "ToRest";
    case Transition::Undecided: return "Undecided";
  }
  return "?";
}

Landscape landscape_for(const RunConfig& c) {
  CycleOptions opt;
  opt.metric = c.domain;
  return compute_landscape(c.model, opt);
}

TransitionOptions transition_options(const RunConfig& c) {
  TransitionOptions t;
  t.dwell = c.mlt.dwell;
  t.metric = c.domain;
  return t;
}

void write_csv(RunWriter& w, const std::string& name, const std::string& text) {
  w.write(name, text);
  emit_plotdata(name, w);
}

void run_phase_portrait(const RunConfig& c, RunWriter& w, std::ostream& log) {
  const Landscape l = landscape_for(c);
  log << "fixed point (" << l.fixed_point.location.v << ", " << l.fixed_point.location.w << "), stable period "
      << l.stable.period << " ms, unstable period " << l.unstable.period << " ms\n";
  w.write("fixed_point.csv", fixed_point_csv(l.fixed_point));
  write_csv(w, "stable_cycle.csv", cycle_csv(l.stable));
  write_csv(w, "unstable_cycle.csv", cycle_csv(l.unstable));
}

void run_density(const RunConfig& c, RunWriter& w, std::ostream& log) {
  SolverConfig s = c.solver_config(c.noise.alpha, c.noise.sigma);
  s.snapshot_times = c.solver.snapshot_times;
  if (s.snapshot_times.empty())
    for (double t : {1.0, 20.0, 70.0, 100.0})
      if (t <= s.T) s.snapshot_times.push_back(t);
  s.validate();
  const Solution sol = solve_any(s, c.mlt.start);
  log << "solved to t=" << s.T << " in " << sol.stats.steps << " steps (dt " << sol.stats.dt << ")\n";
  for (const DensityField& f : sol.snapshots) {
    if (f.time == 0.0 && c.solver.snapshot_times.empty()) continue;
    const std::string stem = "density/t" + time_tag(f.time);
    w.write(stem + ".bin", density_binary(f, s.noise.alpha, s.noise.sigma, s.domain));
    write_csv(w, stem + ".csv", density_csv(f, s.domain));
    log << "  t=" << f.time << " mass " << f.mass() << "\n";
  }
}

void run_mlt(const RunConfig& c, RunWriter& w, std::ostream& log) {
  const Landscape l = landscape_for(c);
  const SolverConfig s = c.solver_config(c.noise.alpha, c.noise.sigma);
  std::string table = "pair,start,v0,w0,verdict,decision_time,switches,ties\n";
  for (StartPair pair : c.mlt.start_pairs) {
    const auto starts = start_states(pair);
    for (int k = 0; k < 2; ++k) {
      MLTrajectory mlt;
      const TransitionVerdict v = run_verdict(s, starts[k], l.unstable, transition_options(c), &mlt);
      const std::string name = "mlt/" + to_string(pair) + "_" + std::to_string(k) + ".csv";
      write_csv(w, name, mlt_csv(mlt));
      table += to_string(pair) + "," + std::to_string(k) + "," + fmt("%.17g", starts[k].v) + "," +
               fmt("%.17g", starts[k].w) + "," + verdict_name(v.tag) + "," +
               (v.decision_time ? fmt("%.17g", *v.decision_time) : std::string()) + "," +
               std::to_string(mlt.switch_times.size()) + "," + std::to_string(mlt.tie_times.size()) + "\n";
      log << to_string(pair) << " start " << k << ": " << verdict_name(v.tag) << "\n";
    }
  }
  w.write("verdicts.csv", table);
}

void run_phase_diagram(const RunConfig& c, RunWriter& w, std::ostream& log, std::vector<std::string>& warnings) {
  const Landscape l = landscape_for(c);
  std::vector<double> alphas = c.noise.alphas.empty() ? std::vector<double>{c.noise.alpha} : c.noise.alphas;
  std::vector<double> sigmas = c.noise.sigmas.empty() ? std::vector<double>{c.noise.sigma} : c.noise.sigmas;
  for (StartPair pair : c.mlt.start_pairs) {
    SweepOptions opt;
    opt.base = c.solver_config(c.noise.alpha, c.noise.sigma);
    opt.starts = start_states(pair);
    opt.transition = transition_options(c);
    opt.jobs = c.jobs;
    const PhaseDiagram pd = phase_diagram(alphas, sigmas, l.unstable, opt);
    for (const PhaseCell& cell : pd.cells) {
      log << to_string(pair) << " alpha=" << cell.alpha << " sigma=" << cell.sigma << ": " << mark_symbol(cell.mark)
          << "\n";
      if (cell.mark == Mark::Failed)
        warnings.push_back(to_string(pair) + " cell alpha=" + fmt("%g", cell.alpha) + " sigma=" + fmt("%g", cell.sigma) +
                           " failed: " + cell.error);
    }
    write_csv(w, "phase_" + to_string(pair) + ".csv", phase_diagram_csv(pd));
  }
}

void run_mc_check(const RunConfig& c, RunWriter& w, std::ostream& log) {
  SolverConfig s = c.solver_config(c.noise.alpha, c.noise.sigma);
  s.grid = Grid{c.mc.J};
  s.T = c.mc.T;
  s.snapshot_interval = c.mc.T;
  s.validate();
  const Solution sol = solve_any(s, c.mlt.start);
  const DensityField& fp = sol.snapshots.back();

  EnsembleOptions e;
  e.n_paths = c.mc.n_paths;
  e.dt = c.mc.dt;
  e.T = c.mc.T;
  e.seed = c.seed;
  e.snapshot_times = {c.mc.T};
  e.jobs = c.jobs;
  const PathEnsemble ens = simulate_ensemble(c.mlt.start, s.noise, e, c.model, c.domain);
  const EmpiricalDensity mc = empirical_density(ens, s.grid, c.domain, c.mc.T);
  const double tv = total_variation(fp, mc.field);
  const double se = histogram_bootstrap_se(ens, s.grid, c.domain, c.mc.T, 50, c.seed);
  log << "t=" << c.mc.T << " total variation " << tv << " (bootstrap se " << se << ")\n";

  std::string summary = "t,total_variation,fp_mass,mc_inside_fraction,bootstrap_se\n";
  summary += fmt("%.17g", c.mc.T) + "," + fmt("%.17g", tv) + "," + fmt("%.17g", fp.mass()) + "," +
             fmt("%.17g", 1.0 - mc.out_fraction) + "," + fmt("%.17g", se) + "\n";
  w.write("mc_check.csv", summary);
  write_csv(w, "fp_density.csv", density_csv(fp, c.domain));
  write_csv(w, "mc_density.csv", density_csv(mc.field, c.domain));
}

}  // namespace

RunResult run(const RunConfig& config, std::ostream& log) {
  validate(config);
  const auto t0 = std::chrono::steady_clock::now();
  RunWriter writer(config.output_dir);
  RunResult result;
  log << "run " << to_string(config.kind) << " -> " << config.output_dir << "\n";
  switch (config.kind) {
    case RunKind::PhasePortrait: run_phase_portrait(config, writer, log); break;
    case RunKind::Density: run_density(config, writer, log); break;
    case RunKind::Mlt: run_mlt(config, writer, log); break;
    case RunKind::PhaseDiagram: run_phase_diagram(config, writer, log, result.warnings); break;
    case RunKind::McCheck: run_mc_check(config, writer, log); break;
  }
  writer.write_manifest(emit_config(config), result.warnings);
  result.files = writer.files();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  log << result.files.size() << " files written in " << secs << " s\n";
  return result;
}

}  // namespace levyml
