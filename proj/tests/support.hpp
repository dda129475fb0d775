#pragma once

// Oracles shared by the unit and acceptance tests.

#include <functional>
#include <vector>

namespace levyml::testing {

/// Density of the symmetric stable law with characteristic function
/// exp(-|scale k|^alpha), evaluated at xs by a DCT of the characteristic
/// function (FFTW).
std::vector<double> stable_density_fft(double alpha, double scale, const std::vector<double>& xs);

/// sup |F_n - F| for a sample against a continuous CDF.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Asymptotic 99% critical value 1.628 / sqrt(n_eff).
double ks_critical_99(double n_eff);

}  // namespace levyml::testing
