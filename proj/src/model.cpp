#include "levyml/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace levyml {

void MLParams::validate() const {
  std::vector<std::string> bad;
  if (!(C > 0)) bad.emplace_back("C must be > 0");
  if (V2 == 0) bad.emplace_back("V2 must be nonzero");
  if (V4 == 0) bad.emplace_back("V4 must be nonzero");
  if (g_Ca < 0 || g_K < 0 || g_L < 0) bad.emplace_back("conductances must be >= 0");
  if (!(phi > 0)) bad.emplace_back("phi must be > 0");
  if (!bad.empty()) {
    std::ostringstream os;
    for (std::size_t i = 0; i < bad.size(); ++i) os << (i ? "; " : "") << bad[i];
    throw Error(ErrorCode::ValidationError, os.str());
  }
}

Gating gating(double v, const MLParams& p) {
  return {0.5 * (1.0 + std::tanh((v - p.V1) / p.V2)), 0.5 * (1.0 + std::tanh((v - p.V3) / p.V4)),
          1.0 / std::cosh((v - p.V3) / (2.0 * p.V4))};
}

Rates vector_field(State s, const MLParams& p) {
  const Gating g = gating(s.v, p);
  const double i_ion = -p.g_Ca * g.m_inf * (s.v - p.V_Ca) - p.g_K * s.w * (s.v - p.V_K) - p.g_L * (s.v - p.V_L);
  return {(i_ion + p.I) / p.C, p.phi * (g.w_inf - s.w) / g.tau_w};
}

State rk4_step(State s, double dt, const MLParams& p, TimeDirection dir) {
  const double h = dir == TimeDirection::Forward ? dt : -dt;
  const Rates k1 = vector_field(s, p);
  const Rates k2 = vector_field({s.v + 0.5 * h * k1.dv, s.w + 0.5 * h * k1.dw}, p);
  const Rates k3 = vector_field({s.v + 0.5 * h * k2.dv, s.w + 0.5 * h * k2.dw}, p);
  const Rates k4 = vector_field({s.v + h * k3.dv, s.w + h * k3.dw}, p);
  return {s.v + h / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv),
          s.w + h / 6.0 * (k1.dw + 2.0 * k2.dw + 2.0 * k3.dw + k4.dw)};
}

namespace {

void check_sane(State s, double t) {
  if (!std::isfinite(s.v) || !std::isfinite(s.w) || s.w < -0.05 || s.w > 1.05) {
    std::ostringstream os;
    os << "state (" << s.v << ", " << s.w << ") left the sanity band at t=" << t;
    throw Error(ErrorCode::NonFinite, os.str());
  }
}

void check_step(double T, double dt) {
  if (!(dt > 0) || !(T >= dt)) throw Error(ErrorCode::OutOfRange, "integrate requires dt > 0 and T >= dt");
}

}  // namespace

Orbit integrate(State s0, double T, double dt, const MLParams& p, TimeDirection dir) {
  check_step(T, dt);
  const auto n = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
  const double step = T / static_cast<double>(n);
  Orbit orbit;
  orbit.times.reserve(n + 1);
  orbit.states.reserve(n + 1);
  orbit.times.push_back(0.0);
  orbit.states.push_back(s0);
  State s = s0;
  for (std::size_t k = 1; k <= n; ++k) {
    s = rk4_step(s, step, p, dir);
    check_sane(s, static_cast<double>(k) * step);
    orbit.times.push_back(static_cast<double>(k) * step);
    orbit.states.push_back(s);
  }
  return orbit;
}

State integrate_to(State s0, double T, double dt, const MLParams& p, TimeDirection dir) {
  check_step(T, dt);
  const auto n = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
  const double step = T / static_cast<double>(n);
  State s = s0;
  for (std::size_t k = 1; k <= n; ++k) {
    s = rk4_step(s, step, p, dir);
    check_sane(s, static_cast<double>(k) * step);
  }
  return s;
}

std::array<std::array<double, 2>, 2> jacobian(State s, const MLParams& p) {
  const Gating g = gating(s.v, p);
  const double sech_m = 1.0 / std::cosh((s.v - p.V1) / p.V2);
  const double sech_w = 1.0 / std::cosh((s.v - p.V3) / p.V4);
  const double dm = 0.5 * sech_m * sech_m / p.V2;
  const double dwinf = 0.5 * sech_w * sech_w / p.V4;
  const double u = (s.v - p.V3) / (2.0 * p.V4);
  return {{{(-p.g_Ca * (dm * (s.v - p.V_Ca) + g.m_inf) - p.g_K * s.w - p.g_L) / p.C, -p.g_K * (s.v - p.V_K) / p.C},
           {p.phi * (dwinf * std::cosh(u) + (g.w_inf - s.w) * std::sinh(u) / (2.0 * p.V4)), -p.phi * std::cosh(u)}}};
}

FixedPoint find_fixed_point(State guess, const MLParams& p, int max_iterations) {
  p.validate();
  State s = guess;
  auto residual = [&](State q) {
    const Rates r = vector_field(q, p);
    return std::hypot(r.dv, r.dw);
  };
  int it = 0;
  while (residual(s) >= 1e-13) {
    if (it == max_iterations) {
      std::ostringstream os;
      os << "Newton did not converge from (" << guess.v << ", " << guess.w << "), residual " << residual(s);
      throw Error(ErrorCode::NoConvergence, os.str());
    }
    const Rates r = vector_field(s, p);
    const auto J = jacobian(s, p);
    const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    if (det == 0.0 || !std::isfinite(det)) throw Error(ErrorCode::NoConvergence, "singular Jacobian");
    const double dv = (J[1][1] * r.dv - J[0][1] * r.dw) / det;
    const double dw = (-J[1][0] * r.dv + J[0][0] * r.dw) / det;
    const State next{s.v - dv, s.w - dw};
    ++it;
    if (next.v == s.v && next.w == s.w) break;  // round-off floor
    s = next;
  }
  if (residual(s) >= 1e-10) throw Error(ErrorCode::NoConvergence, "residual stalled above 1e-10");

  FixedPoint fp;
  fp.location = s;
  fp.iterations = it;
  const auto J = jacobian(s, p);
  const double tr = J[0][0] + J[1][1];
  const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
  const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr - 4.0 * det, 0.0));
  fp.eigenvalues = {0.5 * (tr + disc), 0.5 * (tr - disc)};
  const bool stable = fp.eigenvalues[0].real() < 0 && fp.eigenvalues[1].real() < 0;
  fp.stability = stable ? Stability::Stable : Stability::Unstable;
  return fp;
}

namespace {

// Locates the closed orbit through the section w = ws (v > v_min), crossed in
// the direction in which w increases under forward time.
LimitCycle cycle_by_return_map(State start, double ws, double v_min, const MLParams& p, const CycleOptions& opt,
                               TimeDirection dir) {
  // Under time reversal the orbit crosses the section with w decreasing.
  const double sign = dir == TimeDirection::Forward ? 1.0 : -1.0;
  auto crossed = [&](State a, State b) {
    return sign * (a.w - ws) < 0.0 && sign * (b.w - ws) >= 0.0 && b.v > v_min;
  };

  State s = start;
  double t = 0.0;
  double last_v = std::numeric_limits<double>::quiet_NaN();
  double last_t = 0.0;
  int returns = 0;
  const long max_steps = 50'000'000;
  for (long step = 0; step < max_steps; ++step) {
    const State next = rk4_step(s, opt.dt, p, dir);
    check_sane(next, t + opt.dt);
    if (crossed(s, next)) {
      const double frac = (ws - s.w) / (next.w - s.w);
      const double v_cross = s.v + frac * (next.v - s.v);
      const double t_cross = t + frac * opt.dt;
      if (std::abs(v_cross - last_v) < opt.section_tol) {
        LimitCycle cycle;
        cycle.period = t_cross - last_t;
        cycle.stability = dir == TimeDirection::Forward ? Stability::Stable : Stability::Unstable;
        // Trace one period from the section point.
        State q{v_cross, ws};
        cycle.polyline.push_back(q);
        const auto n = static_cast<long>(std::ceil(cycle.period / opt.dt));
        const double h = cycle.period / static_cast<double>(n);
        for (long k = 1; k < n; ++k) {
          q = rk4_step(q, h, p, dir);
          if (rescaled_distance(opt.metric, q, cycle.polyline.back()) >= opt.vertex_spacing)
            cycle.polyline.push_back(q);
        }
        cycle.polyline.push_back(cycle.polyline.front());
        if (dir == TimeDirection::Backward) std::reverse(cycle.polyline.begin(), cycle.polyline.end());
        for (std::size_t k = 1; k < cycle.polyline.size(); ++k)
          cycle.resolution =
              std::max(cycle.resolution, rescaled_distance(opt.metric, cycle.polyline[k - 1], cycle.polyline[k]));
        return cycle;
      }
      last_v = v_cross;
      last_t = t_cross;
      if (++returns > opt.max_returns) break;
    }
    s = next;
    t += opt.dt;
  }
  throw Error(ErrorCode::NoCycle, "Poincare return map did not converge");
}

}  // namespace

LimitCycle extract_stable_cycle(const MLParams& p, const CycleOptions& opt) {
  const FixedPoint fp = find_fixed_point({-26.0, 0.1}, p);
  // Far to the right of the equilibrium on the section; the outer cycle attracts it.
  const State start{opt.metric.b - 10.0, fp.location.w};
  return cycle_by_return_map(start, fp.location.w, fp.location.v, p, opt, TimeDirection::Forward);
}

namespace {

LimitCycle unstable_from(const FixedPoint& fp, const LimitCycle& stable, const MLParams& p, const CycleOptions& opt) {
  // Rightmost section crossing of the stable cycle; start midway to the equilibrium.
  double v_outer = fp.location.v;
  for (std::size_t k = 1; k < stable.polyline.size(); ++k) {
    const State a = stable.polyline[k - 1];
    const State b = stable.polyline[k];
    if ((a.w - fp.location.w) * (b.w - fp.location.w) <= 0.0 && a.w != b.w) {
      const double v = a.v + (fp.location.w - a.w) / (b.w - a.w) * (b.v - a.v);
      v_outer = std::max(v_outer, v);
    }
  }
  const State start{0.5 * (fp.location.v + v_outer), fp.location.w};
  return cycle_by_return_map(start, fp.location.w, fp.location.v, p, opt, TimeDirection::Backward);
}

}  // namespace

LimitCycle extract_unstable_cycle(const MLParams& p, const CycleOptions& opt) {
  const FixedPoint fp = find_fixed_point({-26.0, 0.1}, p);
  return unstable_from(fp, extract_stable_cycle(p, opt), p, opt);
}

bool point_in_polygon(State s, const std::vector<State>& poly) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const State a = poly[i];
    const State b = poly[j];
    if ((a.w > s.w) != (b.w > s.w)) {
      const double v_at = a.v + (s.w - a.w) / (b.w - a.w) * (b.v - a.v);
      if (s.v < v_at) inside = !inside;
    }
  }
  return inside;
}

double distance_to_polyline(State s, const std::vector<State>& poly, const Domain& metric) {
  const double sx = 2.0 / (metric.b - metric.a);
  const double sy = 2.0 / (metric.d - metric.c);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < poly.size(); ++k) {
    const double ax = (poly[k - 1].v - s.v) * sx, ay = (poly[k - 1].w - s.w) * sy;
    const double bx = (poly[k].v - s.v) * sx, by = (poly[k].w - s.w) * sy;
    const double ex = bx - ax, ey = by - ay;
    const double len2 = ex * ex + ey * ey;
    double t = len2 > 0 ? -(ax * ex + ay * ey) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    best = std::min(best, std::hypot(ax + t * ex, ay + t * ey));
  }
  return best;
}

Basin classify_basin(State s, const LimitCycle& unstable, double band, const Domain& metric) {
  if (unstable.empty()) throw Error(ErrorCode::NoCycle, "classify_basin needs the unstable cycle");
  const double width = band > 0 ? band : unstable.resolution;
  if (distance_to_polyline(s, unstable.polyline, metric) < width) return Basin::Ambiguous;
  return point_in_polygon(s, unstable.polyline) ? Basin::Rest : Basin::Oscillate;
}

Basin classify_by_integration(State s, const FixedPoint& rest, const LimitCycle& stable, const MLParams& p,
                              const Domain& metric) {
  constexpr double dt = 0.05;
  constexpr double chunk = 50.0;
  constexpr double t_max = 40000.0;
  State q = s;
  for (double t = 0; t < t_max; t += chunk) {
    if (rescaled_distance(metric, q, rest.location) < 0.02) return Basin::Rest;
    if (distance_to_polyline(q, stable.polyline, metric) < 0.005) return Basin::Oscillate;
    q = integrate_to(q, chunk, dt, p);
  }
  return Basin::Ambiguous;
}

Landscape compute_landscape(const MLParams& p, const CycleOptions& opt) {
  Landscape l;
  l.fixed_point = find_fixed_point({-26.0, 0.1}, p);
  l.stable = extract_stable_cycle(p, opt);
  l.unstable = unstable_from(l.fixed_point, l.stable, p, opt);
  return l;
}

}  // namespace levyml
