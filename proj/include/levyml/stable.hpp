#pragma once

// Symmetric alpha-stable noise: generator constant, jump measure, sampling,
// increments of the Levy motion and heavy-tail diagnostics.

#include <cstddef>
#include <span>
#include <vector>

#include "levyml/rng.hpp"

namespace levyml {

/// Symmetric stable law S_alpha(sigma, 0, 0). alpha == 2 is the Brownian branch.
struct StableSpec {
  double alpha = 0.5;
  double sigma = 0.25;

  void validate() const;
  bool brownian() const { return alpha == 2.0; }
};

/// Normalisation of the jump measure C_alpha |y|^-(1+alpha) dy, chosen so the
/// generator has Fourier symbol -|k|^alpha. Valid on 0 < alpha < 2.
double c_alpha(double alpha);

/// Density of the jump measure at y != 0.
double jump_measure_density(double alpha, double y);

/// One draw from S_alpha(1, 0, 0) (Chambers-Mallows-Stuck). alpha == 2 gives N(0, 2).
double sample_standard(double alpha, Stream& rng);

/// sigma * dt^(1/alpha) * S_alpha(1,0,0), the increment of sigma L^alpha over dt.
double increment(const StableSpec& spec, double dt, Stream& rng);

/// lim y^alpha P(sigma L_1 > y) for the symmetric law, from the jump measure.
double tail_constant(double alpha, double sigma);

/// Same limit through the classical tail constant (1 - a) / (Gamma(2 - a) cos(pi a / 2)),
/// halved for the symmetric case.
double tail_constant_classical(double alpha, double sigma);

struct TailEstimate {
  double y = 0.0;
  double right = 0.0;   // y^alpha * P(X > y)
  double left = 0.0;    // y^alpha * P(X < -y)
  double theory = 0.0;  // tail_constant(alpha, sigma)
  double right_stderr = 0.0;
  double left_stderr = 0.0;
  std::size_t count_right = 0;
  std::size_t count_left = 0;
};

/// Empirical tail constant at level y. Needs at least 1e5 samples.
TailEstimate tail_diagnostic(double alpha, double sigma, std::span<const double> samples, double y);

/// Least-squares slope of log P(|X| > y) against log y on `points` log-spaced
/// levels over [y_lo, y_hi].
double survival_slope(std::span<const double> samples, double y_lo, double y_hi, int points = 12);

struct TailRow {
  double y;
  double empirical;    // P(X > y)
  double theoretical;  // tail_constant / y^alpha
};

std::vector<TailRow> tail_table(double alpha, double sigma, std::span<const double> samples,
                                std::span<const double> levels);

}  // namespace levyml
