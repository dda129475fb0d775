#pragma once

// Deterministic Morris-Lecar dynamics: vector field, RK4 integration,
// equilibrium, limit cycles and basin classification.

#include <array>
#include <complex>
#include <vector>

#include "levyml/domain.hpp"

namespace levyml {

/// Morris-Lecar constants. Defaults are the type-II bistable set.
struct MLParams {
  double C = 20.0;      // uF/cm^2
  double g_Ca = 4.4;    // uS/cm^2
  double g_K = 8.0;
  double g_L = 2.0;
  double V_Ca = 120.0;  // mV
  double V_K = -84.0;
  double V_L = -60.0;
  double V1 = -1.2;
  double V2 = 18.0;
  double V3 = 2.0;
  double V4 = 30.0;
  double phi = 0.04;
  double I = 92.0;  // uA/cm^2

  void validate() const;
  bool operator==(const MLParams&) const = default;
};

struct Gating {
  double m_inf;
  double w_inf;
  double tau_w;
};

struct Rates {
  double dv;
  double dw;
};

Gating gating(double v, const MLParams& p);
Rates vector_field(State s, const MLParams& p);

enum class TimeDirection { Forward, Backward };

/// One classical RK4 step; Backward integrates the time-reversed field.
State rk4_step(State s, double dt, const MLParams& p, TimeDirection dir = TimeDirection::Forward);

struct Orbit {
  std::vector<double> times;
  std::vector<State> states;
};

/// Fixed-step RK4 over [0, T]. Throws NonFinite when w leaves [-0.05, 1.05].
Orbit integrate(State s0, double T, double dt, const MLParams& p,
                TimeDirection dir = TimeDirection::Forward);

/// Endpoint only, without storing the orbit.
State integrate_to(State s0, double T, double dt, const MLParams& p,
                   TimeDirection dir = TimeDirection::Forward);

enum class Stability { Stable, Unstable };

struct FixedPoint {
  State location;
  std::array<std::complex<double>, 2> eigenvalues;
  Stability stability = Stability::Stable;
  int iterations = 0;
};

std::array<std::array<double, 2>, 2> jacobian(State s, const MLParams& p);

/// Newton iteration on the vector field with an analytic Jacobian.
FixedPoint find_fixed_point(State guess, const MLParams& p, int max_iterations = 100);

struct LimitCycle {
  std::vector<State> polyline;  // closed: front() == back()
  double period = 0.0;
  Stability stability = Stability::Stable;
  double resolution = 0.0;  // max segment length, rescaled units

  bool empty() const { return polyline.size() < 4; }
};

struct CycleOptions {
  double dt = 0.01;
  double section_tol = 1e-6;  // convergence of the section coordinate (mV)
  int max_returns = 5000;
  double vertex_spacing = 2e-3;  // polyline decimation, rescaled units
  Domain metric;                 // defines the rescaled units
};

/// Stable cycle via a Poincare return map on w = w(fixed point), v > v(fixed point).
LimitCycle extract_stable_cycle(const MLParams& p, const CycleOptions& opt = {});

/// Unstable cycle: same return map applied to the time-reversed field.
LimitCycle extract_unstable_cycle(const MLParams& p, const CycleOptions& opt = {});

/// Even-odd ray casting against a closed polyline.
bool point_in_polygon(State s, const std::vector<State>& polyline);

/// Distance from s to the polyline (segments), rescaled units.
double distance_to_polyline(State s, const std::vector<State>& polyline, const Domain& metric = {});

enum class Basin { Rest, Oscillate, Ambiguous };

/// Rest iff strictly inside the unstable cycle. Points closer than `band`
/// (rescaled units) to the polyline are Ambiguous; band <= 0 uses the cycle resolution.
Basin classify_basin(State s, const LimitCycle& unstable, double band = 0.0, const Domain& metric = {});

/// Slow reference classifier: integrate forward until the orbit settles near
/// the fixed point or the stable cycle.
Basin classify_by_integration(State s, const FixedPoint& rest, const LimitCycle& stable, const MLParams& p,
                              const Domain& metric = {});

/// The bistable landscape bundled for callers that need all three objects.
struct Landscape {
  FixedPoint fixed_point;
  LimitCycle stable;
  LimitCycle unstable;
};

Landscape compute_landscape(const MLParams& p, const CycleOptions& opt = {});

}  // namespace levyml
