#include <doctest.h>

#include <cmath>

#include "levyml/error.hpp"
#include "levyml/montecarlo.hpp"

using namespace levyml;

namespace {

const Landscape& landscape() {
  static const Landscape l = compute_landscape(MLParams{});
  return l;
}

}  // namespace

TEST_CASE("guard box is three times the domain") {
  const Domain g = guard_box(Domain{});
  CHECK(g.b - g.a == doctest::Approx(300.0));
  CHECK(g.d - g.c == doctest::Approx(1.8));
  CHECK(0.5 * (g.a + g.b) == doctest::Approx(-10.0));
}

TEST_CASE("sigma = 0 path converges to the RK4 orbit at first order") {
  const MLParams p;
  const State s0{-32.7, 0.4578};
  const double T = 10.0;
  const State ref = integrate_to(s0, T, 0.001, p);
  std::vector<double> err;
  for (double dt : {0.02, 0.01, 0.005}) {
    Stream rng(1, 0);
    const PathResult r = em_path(s0, {0.5, 0.0}, dt, T, rng, p, Domain{});
    err.push_back(std::hypot(r.terminal.v - ref.v, 100.0 * (r.terminal.w - ref.w)));
  }
  const double slope1 = std::log2(err[0] / err[1]), slope2 = std::log2(err[1] / err[2]);
  MESSAGE("EM slopes " << slope1 << ", " << slope2);
  CHECK(slope2 == doctest::Approx(1.0).epsilon(0.2));
  CHECK(err[2] < 0.1);
}

TEST_CASE("paths are bit-reproducible from their stream key") {
  const MLParams p;
  Stream a(5, 17), b(5, 17), c(5, 18);
  const std::vector<double> times{0.5, 1.0};
  const PathResult x = em_path({-32.7, 0.4578}, {1.2, 0.5}, 0.005, 2.0, a, p, Domain{}, times);
  const PathResult y = em_path({-32.7, 0.4578}, {1.2, 0.5}, 0.005, 2.0, b, p, Domain{}, times);
  const PathResult z = em_path({-32.7, 0.4578}, {1.2, 0.5}, 0.005, 2.0, c, p, Domain{}, times);
  CHECK(x.terminal == y.terminal);
  REQUIRE(x.snapshots.size() == 2);
  CHECK(x.snapshots[0] == y.snapshots[0]);
  CHECK_FALSE(x.terminal == z.terminal);
  CHECK_THROWS_AS(em_path({0, 0.3}, {1, 1}, 0.0, 1.0, a, p, Domain{}), Error);
}

TEST_CASE("Brownian increments have variance 2 sigma^2 per unit time") {
  const StableSpec spec{2.0, 0.25};
  const double dt = 0.005;
  Stream rng(9, 0);
  const int n = 200000;
  double s2 = 0;
  for (int k = 0; k < n; ++k) {
    const double x = increment(spec, dt, rng);
    s2 += x * x;
  }
  const double rate = s2 / n / dt;
  // chi-square relative standard error sqrt(2 / n) ~ 0.3%
  CHECK(rate == doctest::Approx(2 * 0.25 * 0.25).epsilon(0.02));
}

TEST_CASE("escaped paths are frozen") {
  const MLParams p;
  Stream rng(3, 0);
  const PathResult r = em_path({-32.7, 0.4578}, {0.3, 50.0}, 0.01, 20.0, rng, p, Domain{});
  REQUIRE(r.escaped);
  CHECK(r.escape_time > 0);
  CHECK_FALSE(guard_box(Domain{}).contains(r.terminal));
}

TEST_CASE("empirical density counting") {
  const Grid g{20};
  const Domain d;
  EnsembleOptions o;
  o.n_paths = 500;
  o.dt = 0.01;
  o.T = 0.5;
  o.snapshot_times = {0.0, 0.5};
  const PathEnsemble ens = simulate_ensemble({-32.7, 0.4578}, {1.0, 0.0}, o, MLParams{}, d);
  const EmpiricalDensity at0 = empirical_density(ens, g, d, 0.0);
  CHECK((at0.field.values.array() > 0).count() == 1);
  CHECK(at0.field.mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(at0.out_fraction == 0.0);

  o.n_paths = 3000;
  const PathEnsemble noisy = simulate_ensemble({-32.7, 0.4578}, {0.5, 0.25}, o, MLParams{}, d);
  const EmpiricalDensity e = empirical_density(noisy, g, d, 0.5);
  CHECK(e.out_fraction > 0);
  CHECK(e.field.mass() + e.out_fraction == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(empirical_density(noisy, g, d, 0.25), Error);
}

TEST_CASE("transition fractions in the deterministic limits") {
  const Landscape& l = landscape();
  EnsembleOptions o;
  o.n_paths = 50;
  o.dt = 0.01;
  o.T = 100.0;
  CHECK(transition_fraction(simulate_ensemble({-32.7, 0.4578}, {1.0, 0.0}, o, MLParams{}, Domain{}), l.unstable) == 0.0);
  CHECK(transition_fraction(simulate_ensemble(l.fixed_point.location, {1.0, 0.0}, o, MLParams{}, Domain{}),
                            l.unstable) == 1.0);
}

TEST_CASE("heavier jumps at alpha = 1.5 move more paths to rest than alpha = 0.5") {
  const Landscape& l = landscape();
  EnsembleOptions o;
  o.n_paths = 4000;
  o.dt = 0.01;
  o.T = 100.0;
  o.seed = 12;
  const double f05 = transition_fraction(simulate_ensemble({-32.7, 0.4578}, {0.5, 0.25}, o, MLParams{}, Domain{}), l.unstable);
  const double f15 = transition_fraction(simulate_ensemble({-32.7, 0.4578}, {1.5, 0.25}, o, MLParams{}, Domain{}), l.unstable);
  MESSAGE("transition fraction alpha 0.5: " << f05 << ", alpha 1.5: " << f15);
  CHECK(f15 > f05);
}

TEST_CASE("ensembles are reproducible and independent of the job count") {
  EnsembleOptions o;
  o.n_paths = 300;
  o.dt = 0.005;
  o.T = 1.0;
  o.snapshot_times = {0.5};
  const PathEnsemble a = simulate_ensemble({-32.7, 0.4578}, {0.7, 0.3}, o, MLParams{}, Domain{});
  o.jobs = 3;
  const PathEnsemble b = simulate_ensemble({-32.7, 0.4578}, {0.7, 0.3}, o, MLParams{}, Domain{});
  CHECK(a.terminal == b.terminal);
  CHECK(a.snapshots == b.snapshots);
  CHECK(a.escaped == b.escaped);
  o.seed = 2;
  const PathEnsemble c = simulate_ensemble({-32.7, 0.4578}, {0.7, 0.3}, o, MLParams{}, Domain{});
  CHECK_FALSE(a.terminal == c.terminal);
}

TEST_CASE("bootstrap standard error shrinks like 1/sqrt(n)") {
  const Grid g{25};
  const Domain d;
  EnsembleOptions o;
  o.dt = 0.01;
  o.T = 1.0;
  o.snapshot_times = {1.0};
  o.n_paths = 20000;
  const PathEnsemble small = simulate_ensemble({-32.7, 0.4578}, {0.5, 0.25}, o, MLParams{}, d);
  o.n_paths = 40000;
  o.seed = 2;
  const PathEnsemble large = simulate_ensemble({-32.7, 0.4578}, {0.5, 0.25}, o, MLParams{}, d);
  const double ratio = histogram_bootstrap_se(small, g, d, 1.0, 200, 1) / histogram_bootstrap_se(large, g, d, 1.0, 200, 1);
  MESSAGE("SE ratio for doubled paths " << ratio);
  CHECK(ratio == doctest::Approx(std::sqrt(2.0)).epsilon(0.3));
}

TEST_CASE("total variation") {
  DensityField p, q;
  p.J = q.J = 2;
  p.values = Eigen::MatrixXd::Zero(3, 3);
  q.values = Eigen::MatrixXd::Zero(3, 3);
  p.values(0, 0) = 4.0;  // cell area 1/4
  q.values(2, 2) = 4.0;
  CHECK(total_variation(p, q) == doctest::Approx(1.0));
  CHECK(total_variation(p, p) == 0.0);
  DensityField r;
  r.J = 3;
  r.values = Eigen::MatrixXd::Zero(5, 5);
  CHECK_THROWS_AS(total_variation(p, r), Error);
}

TEST_CASE("FP and Monte Carlo centroids converge under refinement") {
  // Upwind diffusion smears the FP peak over ~sqrt(h), so cell-wise TV does
  // not shrink at these J; the first moment does.
  const Domain d;
  const State s0{-32.7, 0.4578};
  auto centroid = [](const DensityField& f) {
    const Grid g{f.J};
    double m = 0, x = 0, y = 0;
    for (int i = 0; i < g.nx(); ++i)
      for (int j = 0; j < g.rows_y(); ++j) {
        m += f.values(i, j);
        x += f.values(i, j) * g.x(i);
        y += f.values(i, j) * g.y(j);
      }
    return Rescaled{x / m, y / m};
  };
  std::vector<double> gap;
  const int Js[] = {25, 50, 100};
  for (int J : Js) {
    SolverConfig c;
    c.grid = Grid{J};
    c.noise = {0.5, 0.25};
    c.T = 1.0;
    const Rescaled a = centroid(solve(c, s0).snapshots.back());
    EnsembleOptions o;
    o.n_paths = 50000;
    o.T = 1.0;
    o.snapshot_times = {1.0};
    const PathEnsemble ens = simulate_ensemble(s0, c.noise, o, MLParams{}, d);
    const Rescaled b = centroid(empirical_density(ens, c.grid, d, 1.0).field);
    gap.push_back(std::hypot(a.x - b.x, a.y - b.y));
  }
  MESSAGE("centroid gaps over refinements: " << gap[0] << ", " << gap[1] << ", " << gap[2]);
  CHECK(gap[1] < gap[0]);
  CHECK(gap[2] < gap[1]);
}
