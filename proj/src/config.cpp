#include "levyml/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "levyml/error.hpp"

namespace levyml {

using nlohmann::json;

namespace {

constexpr std::pair<RunKind, const char*> kKinds[] = {
    {RunKind::PhasePortrait, "phase-portrait"}, {RunKind::Density, "density"},        {RunKind::Mlt, "mlt"},
    {RunKind::PhaseDiagram, "phase-diagram"},   {RunKind::McCheck, "mc-check"},
};

bool multiple_of(double t, double step) {
  const double r = t / step;
  return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, std::abs(r));
}

// Walks one JSON object, recording type errors and unknown keys against
// dotted paths instead of throwing at the first problem.
class Reader {
 public:
  Reader(const json& node, std::string path, std::vector<std::string>& errors)
      : node_(node), path_(std::move(path)), errors_(errors) {
    if (!node_.is_object()) errors_.push_back(where("") + ": expected an object");
  }

  ~Reader() {
    if (!node_.is_object()) return;
    for (const auto& item : node_.items())
      if (!seen_.count(item.key())) errors_.push_back(where(item.key()) + ": unknown key");
  }

  template <class T>
  void get(const std::string& key, T& out) {
    const json* v = find(key);
    if (!v) return;
    try {
      out = v->get<T>();
    } catch (const json::exception&) {
      errors_.push_back(where(key) + ": wrong type");
    }
  }

  void get(const std::string& key, std::optional<double>& out) {
    const json* v = find(key);
    if (!v) return;
    if (v->is_null()) {
      out.reset();
    } else if (v->is_number()) {
      out = v->get<double>();
    } else {
      errors_.push_back(where(key) + ": wrong type");
    }
  }

  void get(const std::string& key, State& out) {
    const json* v = find(key);
    if (!v) return;
    if (v->is_array() && v->size() == 2 && (*v)[0].is_number() && (*v)[1].is_number()) {
      out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
    } else {
      errors_.push_back(where(key) + ": expected [v, w]");
    }
  }

  void get(const std::string& key, std::vector<StartPair>& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_array()) {
      errors_.push_back(where(key) + ": expected a list of \"stable\" / \"unstable\"");
      return;
    }
    out.clear();
    for (std::size_t k = 0; k < v->size(); ++k) {
      const json& e = (*v)[k];
      if (e == "stable") {
        out.push_back(StartPair::Stable);
      } else if (e == "unstable") {
        out.push_back(StartPair::Unstable);
      } else {
        errors_.push_back(where(key) + "[" + std::to_string(k) + "]: expected \"stable\" or \"unstable\"");
      }
    }
  }

  /// Nested object, or nullptr when absent.
  const json* child(const std::string& key) { return find(key); }
  std::string where(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const json* find(const std::string& key) {
    seen_.insert(key);
    if (!node_.is_object()) return nullptr;
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  const json& node_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

void read_model(Reader& r, MLParams& m) {
  r.get("C", m.C);
  r.get("g_Ca", m.g_Ca);
  r.get("g_K", m.g_K);
  r.get("g_L", m.g_L);
  r.get("V_Ca", m.V_Ca);
  r.get("V_K", m.V_K);
  r.get("V_L", m.V_L);
  r.get("V1", m.V1);
  r.get("V2", m.V2);
  r.get("V3", m.V3);
  r.get("V4", m.V4);
  r.get("phi", m.phi);
  r.get("I", m.I);
}

json model_json(const MLParams& m) {
  return {{"C", m.C},   {"g_Ca", m.g_Ca}, {"g_K", m.g_K}, {"g_L", m.g_L}, {"V_Ca", m.V_Ca},
          {"V_K", m.V_K}, {"V_L", m.V_L},   {"V1", m.V1},   {"V2", m.V2},   {"V3", m.V3},
          {"V4", m.V4}, {"phi", m.phi},   {"I", m.I}};
}

RunConfig from_json(const json& doc, std::vector<std::string>& errors) {
  RunConfig c;
  Reader root(doc, "", errors);
  std::string kind;
  root.get("kind", kind);
  if (!kind.empty()) {
    try {
      c.kind = parse_run_kind(kind);
    } catch (const Error& e) {
      errors.push_back(std::string("kind: ") + e.what());
    }
  }
  root.get("output_dir", c.output_dir);
  root.get("seed", c.seed);
  root.get("jobs", c.jobs);

  if (const json* n = root.child("model")) {
    Reader r(*n, "model", errors);
    read_model(r, c.model);
  }
  if (const json* n = root.child("domain")) {
    Reader r(*n, "domain", errors);
    r.get("v_min", c.domain.a);
    r.get("v_max", c.domain.b);
    r.get("w_min", c.domain.c);
    r.get("w_max", c.domain.d);
  }
  if (const json* n = root.child("noise")) {
    Reader r(*n, "noise", errors);
    r.get("alpha", c.noise.alpha);
    r.get("sigma", c.noise.sigma);
    r.get("alphas", c.noise.alphas);
    r.get("sigmas", c.noise.sigmas);
  }
  if (const json* n = root.child("solver")) {
    Reader r(*n, "solver", errors);
    r.get("J", c.solver.J);
    r.get("dt", c.solver.dt);
    r.get("T", c.solver.T);
    r.get("snapshot_interval", c.solver.snapshot_interval);
    r.get("snapshot_times", c.solver.snapshot_times);
    r.get("absorbing_exterior", c.solver.absorbing_exterior);
  }
  if (const json* n = root.child("mlt")) {
    Reader r(*n, "mlt", errors);
    r.get("start", c.mlt.start);
    r.get("start_pairs", c.mlt.start_pairs);
    r.get("dwell", c.mlt.dwell);
  }
  if (const json* n = root.child("mc")) {
    Reader r(*n, "mc", errors);
    r.get("n_paths", c.mc.n_paths);
    r.get("dt", c.mc.dt);
    r.get("T", c.mc.T);
    r.get("J", c.mc.J);
  }
  return c;
}

[[noreturn]] void throw_list(ErrorCode code, const std::vector<std::string>& errors) {
  std::ostringstream os;
  os << "invalid configuration:";
  for (const auto& e : errors) os << "\n  " << e;
  throw Error(code, os.str());
}

}  // namespace

std::string to_string(RunKind k) {
  for (const auto& [kind, name] : kKinds)
    if (kind == k) return name;
  return "?";
}

RunKind parse_run_kind(const std::string& s) {
  for (const auto& [kind, name] : kKinds)
    if (s == name) return kind;
  std::string known;
  for (const auto& [kind, name] : kKinds) known += std::string(known.empty() ? "" : ", ") + name;
  throw Error(ErrorCode::ParseError, "unknown run kind '" + s + "' (expected one of " + known + ")");
}

std::string to_string(StartPair p) { return p == StartPair::Stable ? "stable" : "unstable"; }

std::array<State, 2> start_states(StartPair p) {
  if (p == StartPair::Stable) return {State{-32.7, 0.4578}, State{7.459, 0.5004}};
  return {State{-22.73, 0.174}, State{-31.27, 0.15}};
}

std::vector<std::pair<double, double>> RunConfig::sweep_plan() const {
  std::vector<double> as = noise.alphas.empty() ? std::vector<double>{noise.alpha} : noise.alphas;
  std::vector<double> ss = noise.sigmas.empty() ? std::vector<double>{noise.sigma} : noise.sigmas;
  std::sort(as.begin(), as.end());
  std::sort(ss.begin(), ss.end());
  std::vector<std::pair<double, double>> plan;
  for (double a : as)
    for (double s : ss) plan.emplace_back(a, s);
  return plan;
}

SolverConfig RunConfig::solver_config(double alpha, double sigma) const {
  SolverConfig s;
  s.grid = Grid{solver.J};
  s.domain = domain;
  s.params = model;
  s.noise = {alpha, sigma};
  s.T = solver.T;
  s.dt = solver.dt.value_or(0.0);
  s.snapshot_interval = solver.snapshot_interval;
  s.absorbing_exterior = solver.absorbing_exterior;
  return s;
}

std::vector<std::string> validation_errors(const RunConfig& c) {
  std::vector<std::string> bad;
  auto need = [&](bool ok, const std::string& path, const std::string& msg) {
    if (!ok) bad.push_back(path + ": " + msg);
  };
  const MLParams& m = c.model;
  for (auto [name, value] : {std::pair{"C", m.C}, {"g_Ca", m.g_Ca}, {"g_K", m.g_K}, {"g_L", m.g_L}, {"V_Ca", m.V_Ca},
                             {"V_K", m.V_K}, {"V_L", m.V_L}, {"V1", m.V1}, {"V2", m.V2}, {"V3", m.V3}, {"V4", m.V4},
                             {"phi", m.phi}, {"I", m.I}})
    need(std::isfinite(value), std::string("model.") + name, "must be finite");
  need(m.C > 0, "model.C", "must be > 0");
  need(m.V2 != 0, "model.V2", "must be nonzero");
  need(m.V4 != 0, "model.V4", "must be nonzero");
  need(m.g_Ca >= 0, "model.g_Ca", "must be >= 0");
  need(m.g_K >= 0, "model.g_K", "must be >= 0");
  need(m.g_L >= 0, "model.g_L", "must be >= 0");
  need(m.phi > 0, "model.phi", "must be > 0");

  need(c.domain.a < c.domain.b, "domain.v_max", "must exceed domain.v_min");
  need(c.domain.c < c.domain.d, "domain.w_max", "must exceed domain.w_min");

  auto check_alpha = [&](double a, const std::string& path) { need(a > 0 && a <= 2, path, "alpha must lie in (0, 2]"); };
  auto check_sigma = [&](double s, const std::string& path) {
    need(s >= 0 && std::isfinite(s), path, "sigma must be finite and >= 0");
  };
  check_alpha(c.noise.alpha, "noise.alpha");
  check_sigma(c.noise.sigma, "noise.sigma");
  for (std::size_t k = 0; k < c.noise.alphas.size(); ++k)
    check_alpha(c.noise.alphas[k], "noise.alphas[" + std::to_string(k) + "]");
  for (std::size_t k = 0; k < c.noise.sigmas.size(); ++k)
    check_sigma(c.noise.sigmas[k], "noise.sigmas[" + std::to_string(k) + "]");
  auto no_duplicates = [&](std::vector<double> v, const std::string& path) {
    std::sort(v.begin(), v.end());
    need(std::adjacent_find(v.begin(), v.end()) == v.end(), path, "contains duplicates");
  };
  no_duplicates(c.noise.alphas, "noise.alphas");
  no_duplicates(c.noise.sigmas, "noise.sigmas");

  const SolverBlock& s = c.solver;
  need(s.J >= 2, "solver.J", "must be >= 2");
  need(!s.dt || *s.dt > 0, "solver.dt", "must be > 0 or null");
  need(s.T > 0, "solver.T", "must be > 0");
  need(s.snapshot_interval > 0, "solver.snapshot_interval", "must be > 0");
  if (s.T > 0 && s.snapshot_interval > 0) {
    need(multiple_of(s.T, s.snapshot_interval), "solver.T", "must be a multiple of solver.snapshot_interval");
    for (std::size_t k = 0; k < s.snapshot_times.size(); ++k) {
      const double t = s.snapshot_times[k];
      const std::string path = "solver.snapshot_times[" + std::to_string(k) + "]";
      need(t >= 0 && t <= s.T, path, "must lie in [0, solver.T]");
      need(multiple_of(t, s.snapshot_interval), path, "must be a multiple of solver.snapshot_interval");
      if (k > 0) need(t > s.snapshot_times[k - 1], path, "times must increase");
    }
  }

  need(c.domain.a >= c.domain.b || c.domain.c >= c.domain.d || c.domain.contains(c.mlt.start), "mlt.start",
       "must lie inside the domain");
  need(!c.mlt.start_pairs.empty(), "mlt.start_pairs", "must not be empty");
  need(c.mlt.start_pairs.size() <= 2 && (c.mlt.start_pairs.size() < 2 || c.mlt.start_pairs[0] != c.mlt.start_pairs[1]),
       "mlt.start_pairs", "contains duplicates");
  need(c.mlt.dwell >= 1, "mlt.dwell", "must be >= 1");

  need(c.mc.n_paths >= 1, "mc.n_paths", "must be >= 1");
  need(c.mc.dt > 0, "mc.dt", "must be > 0");
  need(c.mc.T > 0, "mc.T", "must be > 0");
  need(c.mc.J >= 2, "mc.J", "must be >= 2");

  need(!c.output_dir.empty(), "output_dir", "must not be empty");
  need(c.jobs >= 1, "jobs", "must be >= 1");
  return bad;
}

void validate(const RunConfig& c) {
  const auto bad = validation_errors(c);
  if (!bad.empty()) throw_list(ErrorCode::ValidationError, bad);
}

RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  std::vector<std::string> errors;
  RunConfig c = from_json(doc, errors);
  for (auto& e : validation_errors(c)) errors.push_back(std::move(e));
  if (!errors.empty()) throw_list(ErrorCode::ValidationError, errors);
  return c;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

std::string emit_config(const RunConfig& c) {
  json pairs = json::array();
  for (StartPair p : c.mlt.start_pairs) pairs.push_back(to_string(p));
  json doc = {
      {"kind", to_string(c.kind)},
      {"output_dir", c.output_dir},
      {"seed", c.seed},
      {"jobs", c.jobs},
      {"model", model_json(c.model)},
      {"domain", {{"v_min", c.domain.a}, {"v_max", c.domain.b}, {"w_min", c.domain.c}, {"w_max", c.domain.d}}},
      {"noise", {{"alpha", c.noise.alpha}, {"sigma", c.noise.sigma}, {"alphas", c.noise.alphas}, {"sigmas", c.noise.sigmas}}},
      {"solver",
       {{"J", c.solver.J},
        {"dt", c.solver.dt ? json(*c.solver.dt) : json(nullptr)},
        {"T", c.solver.T},
        {"snapshot_interval", c.solver.snapshot_interval},
        {"snapshot_times", c.solver.snapshot_times},
        {"absorbing_exterior", c.solver.absorbing_exterior}}},
      {"mlt", {{"start", {c.mlt.start.v, c.mlt.start.w}}, {"start_pairs", pairs}, {"dwell", c.mlt.dwell}}},
      {"mc", {{"n_paths", c.mc.n_paths}, {"dt", c.mc.dt}, {"T", c.mc.T}, {"J", c.mc.J}}},
  };
  return doc.dump(2) + "\n";
}

}  // namespace levyml
