#include <doctest.h>

#include <cmath>

#include "levyml/error.hpp"
#include "levyml/model.hpp"

using namespace levyml;

namespace {

const Landscape& landscape() {
  static const Landscape l = compute_landscape(MLParams{});
  return l;
}

long double tanh_ld(long double x) {
  const long double e = std::exp(2.0L * x);
  return (e - 1.0L) / (e + 1.0L);
}

double min_distance(const LimitCycle& c, State target) {
  // max-norm in units of (0.5 mV, 0.01) against the segments of the polyline
  double best = 1e300;
  for (std::size_t k = 0; k + 1 < c.polyline.size(); ++k) {
    const State a = c.polyline[k], b = c.polyline[k + 1];
    for (int s = 0; s <= 20; ++s) {
      const double u = s / 20.0;
      const double dv = (a.v + u * (b.v - a.v) - target.v) / 0.5;
      const double dw = (a.w + u * (b.w - a.w) - target.w) / 0.01;
      best = std::min(best, std::max(std::abs(dv), std::abs(dw)));
    }
  }
  return best;
}

// Root of w_inf(v) - (v-nullcline) by bisection, independent of Newton.
double nullcline_gap(double v, const MLParams& p) {
  const long double m = 0.5L * (1.0L + tanh_ld((v - p.V1) / p.V2));
  const long double w_v = (p.I - p.g_Ca * m * (v - p.V_Ca) - p.g_L * (v - p.V_L)) / (p.g_K * (v - p.V_K));
  const long double w_inf = 0.5L * (1.0L + tanh_ld((v - p.V3) / p.V4));
  return static_cast<double>(w_v - w_inf);
}

double bisect(double lo, double hi, const MLParams& p) {
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    if ((nullcline_gap(lo, p) < 0) == (nullcline_gap(mid, p) < 0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("gating at the shape voltages") {
  const MLParams p;
  CHECK(gating(p.V1, p).m_inf == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(gating(p.V3, p).w_inf == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(gating(p.V3, p).tau_w == doctest::Approx(1.0).epsilon(1e-15));
  const long double m0 = 0.5L * (1.0L + tanh_ld(1.2L / 18.0L));
  CHECK(gating(0.0, p).m_inf == doctest::Approx(static_cast<double>(m0)).epsilon(1e-14));
  CHECK(gating(0.0, p).m_inf == doctest::Approx(0.5333).epsilon(1e-4));
}

TEST_CASE("gating is monotone and bounded") {
  const MLParams p;
  Gating prev = gating(-100.0, p);
  for (double v = -99.5; v <= 100.0; v += 0.5) {
    const Gating g = gating(v, p);
    CHECK(g.m_inf > prev.m_inf);
    CHECK(g.w_inf > prev.w_inf);
    CHECK(g.m_inf > 0.0);
    CHECK(g.m_inf < 1.0);
    CHECK(g.tau_w > 0.0);
    CHECK(g.tau_w <= 1.0);
    prev = g;
  }
}

TEST_CASE("vector field term by term at (0, 0.5)") {
  const MLParams p;
  const long double v = 0.0L, w = 0.5L;
  const long double m = 0.5L * (1.0L + tanh_ld((v - p.V1) / p.V2));
  const long double winf = 0.5L * (1.0L + tanh_ld((v - p.V3) / p.V4));
  const long double x = (v - p.V3) / (2.0L * p.V4);
  const long double tau = 2.0L / (std::exp(x) + std::exp(-x));
  const long double dv = (p.I - p.g_Ca * m * (v - p.V_Ca) - p.g_K * w * (v - p.V_K) - p.g_L * (v - p.V_L)) / p.C;
  const long double dw = p.phi * (winf - w) / tau;
  const Rates r = vector_field({0.0, 0.5}, p);
  CHECK(r.dv == doctest::Approx(static_cast<double>(dv)).epsilon(1e-14));
  CHECK(r.dw == doctest::Approx(static_cast<double>(dw)).epsilon(1e-14));
}

TEST_CASE("w-nullcline has zero dw/dt") {
  const MLParams p;
  for (double v = -60; v <= 40; v += 7.3) CHECK(std::abs(vector_field({v, gating(v, p).w_inf}, p).dw) < 1e-16);
}

TEST_CASE("parameter validation") {
  MLParams p;
  p.C = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.V2 = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  CHECK_NOTHROW(MLParams{}.validate());
}

TEST_CASE("fixed point is a spiral sink matching the nullcline intersection") {
  const MLParams p;
  const FixedPoint fp = find_fixed_point({-26.0, 0.1}, p);
  const Rates r = vector_field(fp.location, p);
  CHECK(std::hypot(r.dv, r.dw) < 1e-10);
  CHECK(fp.stability == Stability::Stable);
  CHECK(fp.eigenvalues[0].real() < 0);
  CHECK(std::abs(fp.eigenvalues[0].imag()) > 0);
  const double v_star = bisect(-30.0, -20.0, p);
  CHECK(fp.location.v == doctest::Approx(v_star).epsilon(1e-9));
  CHECK(fp.location.w == doctest::Approx(gating(v_star, p).w_inf).epsilon(1e-9));

  const FixedPoint again = find_fixed_point(fp.location, p);
  CHECK(again.iterations <= 1);
  CHECK(again.location.v == doctest::Approx(fp.location.v).epsilon(1e-12));
}

TEST_CASE("fixed point with I = 0 matches a grid scan") {
  MLParams p;
  p.I = 0.0;
  // sign changes of the nullcline gap on a dense v grid
  double root_lo = 0, root_hi = 0;
  int roots = 0;
  for (double v = -80; v < 40; v += 0.01) {
    if ((nullcline_gap(v, p) < 0) != (nullcline_gap(v + 0.01, p) < 0)) {
      ++roots;
      root_lo = v;
      root_hi = v + 0.01;
    }
  }
  REQUIRE(roots == 1);
  const FixedPoint fp = find_fixed_point({-50.0, 0.01}, p);
  const Rates r = vector_field(fp.location, p);
  CHECK(std::hypot(r.dv, r.dw) < 1e-10);
  CHECK(fp.location.v >= root_lo);
  CHECK(fp.location.v <= root_hi);
}

TEST_CASE("integration stays at the fixed point and rejects bad steps") {
  const MLParams p;
  const State fp = landscape().fixed_point.location;
  const Orbit o = integrate(fp, 200.0, 0.01, p);
  for (const State& s : o.states) CHECK(std::max(std::abs(s.v - fp.v), std::abs(s.w - fp.w)) < 1e-6);
  for (std::size_t k = 1; k < o.times.size(); ++k) CHECK(o.times[k] > o.times[k - 1]);
  CHECK_THROWS_AS(integrate(fp, 1.0, 0.0, p), Error);
  CHECK_THROWS_AS(integrate({0.0, 1.2}, 1.0, 0.1, p), Error);
}

TEST_CASE("RK4 order from step halving") {
  const MLParams p;
  const State s0{-32.7, 0.4578};
  const double T = 20.0;
  const State a = integrate_to(s0, T, 0.2, p);
  const State b = integrate_to(s0, T, 0.1, p);
  const State c = integrate_to(s0, T, 0.05, p);
  const double e1 = std::hypot(a.v - b.v, 50.0 * (a.w - b.w));
  const double e2 = std::hypot(b.v - c.v, 50.0 * (b.w - c.w));
  const double order = std::log2(e1 / e2);
  MESSAGE("measured RK4 order " << order);
  CHECK(order >= 3.8);
}

TEST_CASE("stable cycle anchors, closure and enclosure") {
  const Landscape& l = landscape();
  const LimitCycle& c = l.stable;
  REQUIRE_FALSE(c.empty());
  CHECK(c.stability == Stability::Stable);
  CHECK(c.polyline.front().v == c.polyline.back().v);
  CHECK(c.polyline.front().w == c.polyline.back().w);
  CHECK(min_distance(c, {-32.7, 0.4578}) <= 1.0);
  CHECK(min_distance(c, {7.459, 0.5004}) <= 1.0);
  CHECK(point_in_polygon(l.fixed_point.location, c.polyline));
  for (std::size_t k = 0; k < l.unstable.polyline.size(); k += 10) CHECK(point_in_polygon(l.unstable.polyline[k], c.polyline));

  // one period from a vertex returns to the polyline
  const MLParams p;
  for (std::size_t k = 0; k < c.polyline.size(); k += c.polyline.size() / 5) {
    const State end = integrate_to(c.polyline[k], c.period, 0.01, p);
    CHECK(rescaled_distance({}, end, c.polyline[k]) < 1e-3);
  }
}

TEST_CASE("unstable cycle anchors and separatrix property") {
  const Landscape& l = landscape();
  const LimitCycle& u = l.unstable;
  const MLParams p;
  REQUIRE_FALSE(u.empty());
  CHECK(u.stability == Stability::Unstable);
  CHECK(min_distance(u, {-22.73, 0.174}) <= 1.0);
  CHECK(min_distance(u, {-31.27, 0.15}) <= 1.0);

  const State fp = l.fixed_point.location;
  const State on = u.polyline[u.polyline.size() / 3];
  const State inside{on.v + 0.05 * (fp.v - on.v), on.w + 0.05 * (fp.w - on.w)};
  const State outside{on.v - 0.05 * (fp.v - on.v), on.w - 0.05 * (fp.w - on.w)};
  CHECK(classify_by_integration(inside, l.fixed_point, l.stable, p) == Basin::Rest);
  CHECK(classify_by_integration(outside, l.fixed_point, l.stable, p) == Basin::Oscillate);

  // reversed integration over one period returns to the polyline
  for (std::size_t k = 0; k < u.polyline.size(); k += u.polyline.size() / 4) {
    const State end = integrate_to(u.polyline[k], u.period, 0.01, p, TimeDirection::Backward);
    CHECK(distance_to_polyline(end, u.polyline) < 1e-3);
  }
}

TEST_CASE("basin classification examples") {
  const Landscape& l = landscape();
  const MLParams p;
  CHECK(classify_basin(l.fixed_point.location, l.unstable) == Basin::Rest);
  CHECK(classify_basin({-32.7, 0.4578}, l.unstable) == Basin::Oscillate);
  CHECK(classify_basin({-26.5, 0.13}, l.unstable) == Basin::Rest);
  CHECK(classify_by_integration({-26.5, 0.13}, l.fixed_point, l.stable, p) == Basin::Rest);
  CHECK(classify_basin(l.unstable.polyline[7], l.unstable) == Basin::Ambiguous);
  CHECK_THROWS_AS(classify_basin({0, 0}, LimitCycle{}), Error);
}

TEST_CASE("polygon and integration classifiers agree on a 50x50 grid") {
  const Landscape& l = landscape();
  const MLParams p;
  const Domain d;
  int compared = 0, agree = 0;
  for (int i = 0; i < 50; ++i) {
    for (int j = 0; j < 50; ++j) {
      const State s{d.a + (i + 0.5) * (d.b - d.a) / 50, d.c + (j + 0.5) * (d.d - d.c) / 50};
      const Basin fast = classify_basin(s, l.unstable);
      if (fast == Basin::Ambiguous) continue;
      ++compared;
      agree += fast == classify_by_integration(s, l.fixed_point, l.stable, p);
    }
  }
  MESSAGE(agree << " of " << compared << " agree");
  CHECK(agree >= 0.99 * compared);
}

TEST_CASE("point in polygon on a unit square") {
  const std::vector<State> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}};
  CHECK(point_in_polygon({0.5, 0.5}, sq));
  CHECK_FALSE(point_in_polygon({1.5, 0.5}, sq));
  CHECK_FALSE(point_in_polygon({-0.1, 0.2}, sq));
}
