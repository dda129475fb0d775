#pragma once

// Nonlocal Fokker-Planck solver for dv = f1 dt + sigma dL^alpha, dw = f2 dt on
// a rectangle, discretised on the rescaled square (-1,1)^2 with an absorbing
// exterior.
//
// Layout: a DensityField stores P(x_i, y_j) for interior nodes as an
// (nx x ny) matrix; row index i runs along x (potential), column j along y
// (recovery). Node i sits at x = -1 + (i + 1) h with h = 1/J. The noise acts
// along x only, so its generator is a dense (nx x nx) matrix applied to every
// column at once.

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "levyml/domain.hpp"
#include "levyml/model.hpp"
#include "levyml/stable.hpp"

namespace levyml {

struct Grid {
  int J = 100;
  int ny = 0;  // rows along y; 0 means 2J - 1. 1 gives the 1-D reduction at y = 0.

  double h() const { return 1.0 / J; }
  int nx() const { return 2 * J - 1; }
  int rows_y() const { return ny > 0 ? ny : 2 * J - 1; }
  double x(int i) const { return static_cast<double>(i - (J - 1)) / J; }
  double y(int j) const { return rows_y() == 1 ? 0.0 : static_cast<double>(j - (J - 1)) / J; }
  /// Interior node nearest to the rescaled coordinate (clamped to the interior).
  int index_x(double x) const;
  int index_y(double y) const;
  double cell_area() const { return rows_y() == 1 ? h() : h() * h(); }
  void validate() const;
};

struct DensityField {
  Eigen::MatrixXd values;  // nx x ny
  double time = 0.0;
  int J = 0;

  /// h^2, or h for a single-row (1-D) field.
  double cell_area() const;
  /// Midpoint quadrature over the rescaled square.
  double mass() const;
  double min() const { return values.minCoeff(); }
};

using DriftFn = std::function<Rates(State)>;

struct SolverConfig {
  Grid grid;
  Domain domain;
  MLParams params;
  StableSpec noise;
  double T = 100.0;
  double dt = 0.0;                 // 0: automatic stability bound
  double snapshot_interval = 0.5;  // snapshots at multiples of this time
  std::vector<double> snapshot_times;  // if non-empty, only these (plus t = 0)
  std::optional<std::array<double, 2>> lf_speeds;  // override of max|f1|, max|f2|
  bool absorbing_exterior = true;  // include the killing rate of jumps leaving D

  void validate() const;
};

/// Drift sampled at interior nodes (model units) with the global
/// Lax-Friedrichs speeds.
struct DriftSamples {
  Eigen::MatrixXd f1;
  Eigen::MatrixXd f2;
  double speed1 = 0.0;
  double speed2 = 0.0;
};

DriftSamples sample_drift(const DriftFn& drift, const Grid& grid, const Domain& domain,
                          const std::optional<std::array<double, 2>>& lf_speeds = std::nullopt);

/// max |f1|, max |f2| on a 200 x 200 lattice over D, times 1.1.
std::array<double, 2> lax_friedrichs_speeds(const DriftFn& drift, const Domain& domain);

/// Riemann zeta at alpha - 1, the correction constant's only transcendental input.
double zeta_shifted(double alpha);

/// Generator of the v-direction stable noise on the grid (nx x nx). Row i
/// holds the corrected trapezoid discretisation of the jump integral over
/// (-1 - x_i, 1 - x_i); with `absorbing_exterior` the analytic rate of jumps
/// leaving the square is added to the diagonal.
Eigen::MatrixXd nonlocal_matrix(const StableSpec& noise, const Grid& grid, const Domain& domain,
                                bool absorbing_exterior = true);

/// sigma^2/2 d^2/dv^2 with central differences and homogeneous Dirichlet data.
Eigen::MatrixXd brownian_matrix(double sigma, const Grid& grid, const Domain& domain);

/// Delta initial condition: unit mass in the cell containing s0.
DensityField init_delta(State s0, const Grid& grid, const Domain& domain);

/// Noise contribution dP/dt from the jump operator.
Eigen::MatrixXd nonlocal_operator(const Eigen::MatrixXd& P, const StableSpec& noise, const Grid& grid,
                                  const Domain& domain, bool absorbing_exterior = true);

/// -(2/(b-a)) [(f1 P)+_x + (f1 P)-_x] - (2/(d-c)) [(f2 P)+_y + (f2 P)-_y]
/// with global Lax-Friedrichs splitting and one-sided upwind differences.
Eigen::MatrixXd advection_flux(const Eigen::MatrixXd& P, const DriftSamples& drift, const Grid& grid,
                               const Domain& domain);

/// Precomputed right-hand side dP/dt = advection + noise.
class Operators {
 public:
  Operators(Eigen::MatrixXd noise, DriftSamples drift, const Grid& grid, const Domain& domain);

  Eigen::MatrixXd rhs(const Eigen::MatrixXd& P) const;
  /// 0.4 * min(advective CFL bound, 1 / max |noise diagonal|).
  double stable_dt() const;

  const Grid& grid() const { return grid_; }
  const Domain& domain() const { return domain_; }
  const Eigen::MatrixXd& noise() const { return noise_; }
  const DriftSamples& drift() const { return drift_; }

 private:
  Eigen::MatrixXd noise_;
  DriftSamples drift_;
  Grid grid_;
  Domain domain_;
};

struct StepReport {
  double negative_mass = 0.0;  // mass removed by the clamp (>= 0)
};

/// One SSP-RK3 step followed by clamping negative values to zero.
/// Throws Unstable when a value exceeds 1e6 or is non-finite.
StepReport step(DensityField& P, double dt, const Operators& ops);

struct SolveStats {
  long steps = 0;
  double dt = 0.0;
  double max_negative_fraction = 0.0;  // per-step clamped mass / mass
  double clamped_mass = 0.0;
  bool mass_monotone = true;
};

struct Solution {
  std::vector<DensityField> snapshots;
  SolveStats stats;
};

/// Builds the operator for a config: stable noise for alpha < 2, Brownian
/// diffusion for alpha == 2. The default drift is the Morris-Lecar field.
Operators build_operators(const SolverConfig& config, const DriftFn& drift = {});

/// Time-marching with snapshots; alpha must be < 2.
Solution solve(const SolverConfig& config, State s0, const DriftFn& drift = {});

/// Brownian-noise counterpart; alpha must be 2.
Solution solve_brownian(const SolverConfig& config, State s0, const DriftFn& drift = {});

/// Dispatches on alpha.
Solution solve_any(const SolverConfig& config, State s0, const DriftFn& drift = {});

/// March an existing field to `config.T` with the given operators.
Solution march(const SolverConfig& config, DensityField initial, const Operators& ops);

}  // namespace levyml
