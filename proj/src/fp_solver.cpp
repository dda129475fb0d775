#include "levyml/fp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "levyml/error.hpp"

namespace levyml {

int Grid::index_x(double x) const {
  const int i = static_cast<int>(std::lround((x + 1.0) * J)) - 1;
  return std::clamp(i, 0, nx() - 1);
}

int Grid::index_y(double y) const {
  if (rows_y() == 1) return 0;
  const int j = static_cast<int>(std::lround((y + 1.0) * J)) - 1;
  return std::clamp(j, 0, rows_y() - 1);
}

void Grid::validate() const {
  if (J < 2) throw Error(ErrorCode::ValidationError, "grid.J must be >= 2");
  if (ny < 0) throw Error(ErrorCode::ValidationError, "grid.ny must be >= 0");
}

double DensityField::cell_area() const {
  const double h = 1.0 / J;
  return values.cols() == 1 ? h : h * h;
}

double DensityField::mass() const { return values.sum() * cell_area(); }

void SolverConfig::validate() const {
  grid.validate();
  domain.validate();
  params.validate();
  noise.validate();
  std::vector<std::string> bad;
  if (!(T > 0)) bad.emplace_back("T must be > 0");
  if (dt < 0) bad.emplace_back("dt must be >= 0");
  if (!(snapshot_interval > 0)) bad.emplace_back("snapshot_interval must be > 0");
  if (snapshot_interval > 0 && T > 0) {
    const double ratio = T / snapshot_interval;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) bad.emplace_back("T must be a multiple of snapshot_interval");
    for (double t : snapshot_times) {
      const double r = t / snapshot_interval;
      if (t < 0 || t > T * (1 + 1e-12) || std::abs(r - std::round(r)) > 1e-9 * std::max(1.0, r))
        bad.emplace_back("snapshot time " + std::to_string(t) + " is not a multiple of snapshot_interval in [0, T]");
    }
  }
  if (lf_speeds && ((*lf_speeds)[0] < 0 || (*lf_speeds)[1] < 0)) bad.emplace_back("lf_speeds must be >= 0");
  if (!bad.empty()) {
    std::ostringstream os;
    for (std::size_t i = 0; i < bad.size(); ++i) os << (i ? "; " : "") << bad[i];
    throw Error(ErrorCode::ValidationError, os.str());
  }
}

std::array<double, 2> lax_friedrichs_speeds(const DriftFn& drift, const Domain& domain) {
  constexpr int kSamples = 200;
  double m1 = 0.0, m2 = 0.0;
  for (int a = 0; a < kSamples; ++a) {
    const double v = domain.a + (domain.b - domain.a) * a / (kSamples - 1);
    for (int c = 0; c < kSamples; ++c) {
      const double w = domain.c + (domain.d - domain.c) * c / (kSamples - 1);
      const Rates r = drift({v, w});
      m1 = std::max(m1, std::abs(r.dv));
      m2 = std::max(m2, std::abs(r.dw));
    }
  }
  return {1.1 * m1, 1.1 * m2};
}

DriftSamples sample_drift(const DriftFn& drift, const Grid& grid, const Domain& domain,
                          const std::optional<std::array<double, 2>>& lf_speeds) {
  const AffineMap map(domain);
  DriftSamples out;
  out.f1.resize(grid.nx(), grid.rows_y());
  out.f2.resize(grid.nx(), grid.rows_y());
  for (int j = 0; j < grid.rows_y(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      const Rates r = drift(map.to_state({grid.x(i), grid.y(j)}));
      out.f1(i, j) = r.dv;
      out.f2(i, j) = r.dw;
    }
  }
  const auto speeds = lf_speeds ? *lf_speeds : lax_friedrichs_speeds(drift, domain);
  // The splitting needs speeds that dominate the sampled drift.
  out.speed1 = std::max(speeds[0], out.f1.cwiseAbs().maxCoeff());
  out.speed2 = std::max(speeds[1], out.f2.cwiseAbs().maxCoeff());
  return out;
}

double zeta_shifted(double alpha) { return std::riemann_zeta(alpha - 1.0); }

Eigen::MatrixXd nonlocal_matrix(const StableSpec& noise, const Grid& grid, const Domain& domain,
                                bool absorbing_exterior) {
  if (!(noise.alpha > 0.0 && noise.alpha < 2.0)) {
    std::ostringstream os;
    os << "nonlocal operator needs 0 < alpha < 2, got " << noise.alpha;
    throw Error(ErrorCode::OutOfRange, os.str());
  }
  const double alpha = noise.alpha;
  const int J = grid.J;
  const int n = grid.nx();
  const double h = grid.h();
  const double kappa = std::pow(2.0 * noise.sigma / (domain.b - domain.a), alpha) * c_alpha(alpha);
  const double c_hx = -kappa * zeta_shifted(alpha) * std::pow(h, 2.0 - alpha);

  // |x_k|^-(1+alpha) for k = 1..2J
  std::vector<double> weight(2 * J + 1, 0.0);
  for (int k = 1; k <= 2 * J; ++k) weight[k] = std::pow(k * h, -(1.0 + alpha));

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const int ii = i - (J - 1);  // physical index
    const int k_lo = -J - ii, k_hi = J - ii;
    double diag = 0.0;
    for (int k = k_lo; k <= k_hi; ++k) {
      if (k == 0) continue;
      const double wk = kappa * h * weight[std::abs(k)];
      const double trap = (k == k_lo || k == k_hi) ? 0.5 : 1.0;
      diag -= trap * wk;
      const int target = i + k;
      if (target >= 0 && target < n) M(i, target) += trap * wk;
    }
    diag -= 2.0 * c_hx / (h * h);
    if (i > 0) M(i, i - 1) += c_hx / (h * h);
    if (i < n - 1) M(i, i + 1) += c_hx / (h * h);
    if (absorbing_exterior) {
      const double x = grid.x(i);
      diag -= kappa / alpha * (std::pow(1.0 + x, -alpha) + std::pow(1.0 - x, -alpha));
    }
    M(i, i) += diag;
  }
  return M;
}

Eigen::MatrixXd brownian_matrix(double sigma, const Grid& grid, const Domain& domain) {
  const int n = grid.nx();
  const double scale = 2.0 / (domain.b - domain.a);
  const double coeff = 0.5 * sigma * sigma * scale * scale / (grid.h() * grid.h());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    M(i, i) = -2.0 * coeff;
    if (i > 0) M(i, i - 1) = coeff;
    if (i < n - 1) M(i, i + 1) = coeff;
  }
  return M;
}

DensityField init_delta(State s0, const Grid& grid, const Domain& domain) {
  if (!domain.contains(s0)) {
    std::ostringstream os;
    os << "initial state (" << s0.v << ", " << s0.w << ") is outside the domain";
    throw Error(ErrorCode::OutOfDomain, os.str());
  }
  const AffineMap map(domain);
  const Rescaled r = map.to_rescaled(s0);
  DensityField field;
  field.J = grid.J;
  field.values = Eigen::MatrixXd::Zero(grid.nx(), grid.rows_y());
  field.values(grid.index_x(r.x), grid.index_y(r.y)) = 1.0 / field.cell_area();
  return field;
}

Eigen::MatrixXd nonlocal_operator(const Eigen::MatrixXd& P, const StableSpec& noise, const Grid& grid,
                                  const Domain& domain, bool absorbing_exterior) {
  return nonlocal_matrix(noise, grid, domain, absorbing_exterior) * P;
}

Eigen::MatrixXd advection_flux(const Eigen::MatrixXd& P, const DriftSamples& drift, const Grid& grid,
                               const Domain& domain) {
  const Eigen::Index nx = P.rows(), ny = P.cols();
  const double inv_h = 1.0 / grid.h();
  const double sx = 2.0 / (domain.b - domain.a) * inv_h;
  const double sy = 2.0 / (domain.d - domain.c) * inv_h;
  const double a1 = drift.speed1, a2 = drift.speed2;

  Eigen::MatrixXd out(nx, ny);
  // g+ = (f + a) P / 2 differenced backward, g- = (f - a) P / 2 differenced forward;
  // P vanishes on the boundary nodes.
  for (Eigen::Index j = 0; j < ny; ++j) {
    for (Eigen::Index i = 0; i < nx; ++i) {
      const double gp = 0.5 * (drift.f1(i, j) + a1) * P(i, j);
      const double gm = 0.5 * (drift.f1(i, j) - a1) * P(i, j);
      const double gp_prev = i > 0 ? 0.5 * (drift.f1(i - 1, j) + a1) * P(i - 1, j) : 0.0;
      const double gm_next = i + 1 < nx ? 0.5 * (drift.f1(i + 1, j) - a1) * P(i + 1, j) : 0.0;
      out(i, j) = -sx * ((gp - gp_prev) + (gm_next - gm));
    }
  }
  if (ny > 1) {
    for (Eigen::Index j = 0; j < ny; ++j) {
      for (Eigen::Index i = 0; i < nx; ++i) {
        const double gp = 0.5 * (drift.f2(i, j) + a2) * P(i, j);
        const double gm = 0.5 * (drift.f2(i, j) - a2) * P(i, j);
        const double gp_prev = j > 0 ? 0.5 * (drift.f2(i, j - 1) + a2) * P(i, j - 1) : 0.0;
        const double gm_next = j + 1 < ny ? 0.5 * (drift.f2(i, j + 1) - a2) * P(i, j + 1) : 0.0;
        out(i, j) -= sy * ((gp - gp_prev) + (gm_next - gm));
      }
    }
  }
  return out;
}

Operators::Operators(Eigen::MatrixXd noise, DriftSamples drift, const Grid& grid, const Domain& domain)
    : noise_(std::move(noise)), drift_(std::move(drift)), grid_(grid), domain_(domain) {}

Eigen::MatrixXd Operators::rhs(const Eigen::MatrixXd& P) const {
  Eigen::MatrixXd out = advection_flux(P, drift_, grid_, domain_);
  out.noalias() += noise_ * P;
  return out;
}

double Operators::stable_dt() const {
  const double h = grid_.h();
  double adv_rate = 2.0 / (domain_.b - domain_.a) * drift_.speed1;
  if (grid_.rows_y() > 1) adv_rate += 2.0 / (domain_.d - domain_.c) * drift_.speed2;
  const double dt_adv = adv_rate > 0 ? h / adv_rate : std::numeric_limits<double>::infinity();
  const double diag = noise_.diagonal().cwiseAbs().maxCoeff();
  const double dt_noise = diag > 0 ? 1.0 / diag : std::numeric_limits<double>::infinity();
  const double dt = 0.4 * std::min(dt_adv, dt_noise);
  if (!std::isfinite(dt)) return 0.1;
  return dt;
}

StepReport step(DensityField& P, double dt, const Operators& ops) {
  const Eigen::MatrixXd& u = P.values;
  Eigen::MatrixXd u1 = u + dt * ops.rhs(u);
  Eigen::MatrixXd u2 = 0.75 * u + 0.25 * (u1 + dt * ops.rhs(u1));
  Eigen::MatrixXd next = (1.0 / 3.0) * u + (2.0 / 3.0) * (u2 + dt * ops.rhs(u2));

  if (!next.allFinite() || next.maxCoeff() > 1e6) {
    std::ostringstream os;
    os << "density blew up at t=" << P.time + dt << " (dt=" << dt << ")";
    throw Error(ErrorCode::Unstable, os.str());
  }
  StepReport report;
  report.negative_mass = -next.cwiseMin(0.0).sum() * P.cell_area();
  P.values = next.cwiseMax(0.0);
  P.time += dt;
  return report;
}

Operators build_operators(const SolverConfig& config, const DriftFn& drift) {
  config.validate();
  const DriftFn field = drift ? drift : DriftFn([p = config.params](State s) { return vector_field(s, p); });
  Eigen::MatrixXd noise = config.noise.brownian()
                              ? brownian_matrix(config.noise.sigma, config.grid, config.domain)
                              : nonlocal_matrix(config.noise, config.grid, config.domain, config.absorbing_exterior);
  return Operators(std::move(noise), sample_drift(field, config.grid, config.domain, config.lf_speeds), config.grid,
                   config.domain);
}

Solution march(const SolverConfig& config, DensityField initial, const Operators& ops) {
  const double dt_max = config.dt > 0 ? config.dt : ops.stable_dt();
  const double interval = config.snapshot_interval;
  const long per_interval = std::max<long>(1, static_cast<long>(std::ceil(interval / dt_max - 1e-12)));
  const double dt = interval / static_cast<double>(per_interval);
  const long intervals = std::lround(config.T / interval);

  auto wanted = [&](long k) {
    if (config.snapshot_times.empty()) return true;
    const double t = static_cast<double>(k) * interval;
    return std::any_of(config.snapshot_times.begin(), config.snapshot_times.end(),
                       [&](double s) { return std::abs(s - t) < 0.5 * interval; });
  };

  Solution sol;
  sol.stats.dt = dt;
  DensityField field = std::move(initial);
  field.time = 0.0;
  sol.snapshots.push_back(field);
  double mass = field.mass();
  for (long k = 1; k <= intervals; ++k) {
    for (long s = 0; s < per_interval; ++s) {
      const StepReport rep = step(field, dt, ops);
      ++sol.stats.steps;
      const double m = field.mass();
      if (m > mass * (1.0 + 1e-12) + 1e-15) sol.stats.mass_monotone = false;
      if (mass > 0) sol.stats.max_negative_fraction = std::max(sol.stats.max_negative_fraction, rep.negative_mass / mass);
      sol.stats.clamped_mass += rep.negative_mass;
      mass = m;
    }
    field.time = static_cast<double>(k) * interval;
    if (wanted(k)) sol.snapshots.push_back(field);
  }
  return sol;
}

Solution solve(const SolverConfig& config, State s0, const DriftFn& drift) {
  if (config.noise.alpha >= 2.0) throw Error(ErrorCode::OutOfRange, "solve needs alpha < 2; use solve_brownian");
  const Operators ops = build_operators(config, drift);
  return march(config, init_delta(s0, config.grid, config.domain), ops);
}

Solution solve_brownian(const SolverConfig& config, State s0, const DriftFn& drift) {
  if (!config.noise.brownian()) throw Error(ErrorCode::OutOfRange, "solve_brownian needs alpha == 2");
  const Operators ops = build_operators(config, drift);
  return march(config, init_delta(s0, config.grid, config.domain), ops);
}

Solution solve_any(const SolverConfig& config, State s0, const DriftFn& drift) {
  return config.noise.brownian() ? solve_brownian(config, s0, drift) : solve(config, s0, drift);
}

}  // namespace levyml
