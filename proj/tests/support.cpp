#include "support.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace levyml::testing {

std::vector<double> stable_density_fft(double alpha, double scale, const std::vector<double>& xs) {
  double xmax = 0.0, gap = 1e9;
  std::vector<double> sorted(xs);
  for (double& x : sorted) x = std::abs(x);
  std::sort(sorted.begin(), sorted.end());
  xmax = sorted.back();
  for (std::size_t k = 1; k < sorted.size(); ++k)
    if (sorted[k] > sorted[k - 1]) gap = std::min(gap, sorted[k] - sorted[k - 1]);
  if (sorted.front() > 0) gap = std::min(gap, sorted.front());

  // x_n = n dx on a half-period of 2^20 dx; every requested point must be a node.
  const int sub = 8;
  const double dx = gap / sub;
  const std::size_t n = (std::size_t{1} << 20) + 1;
  if (xmax / dx > 0.5 * static_cast<double>(n)) throw std::runtime_error("stable_density_fft: range too wide");
  const double dk = std::numbers::pi / (static_cast<double>(n - 1) * dx);

  std::vector<double> phi(n), out(n);
  for (std::size_t m = 0; m < n; ++m) phi[m] = std::exp(-std::pow(scale * dk * static_cast<double>(m), alpha));
  fftw_plan plan = fftw_plan_r2r_1d(static_cast<int>(n), phi.data(), out.data(), FFTW_REDFT00, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  std::vector<double> p;
  p.reserve(xs.size());
  for (double x : xs) {
    const auto idx = static_cast<std::size_t>(std::llround(std::abs(x) / dx));
    p.push_back(dk / (2.0 * std::numbers::pi) * out[idx]);
  }
  return p;
}

double ks_statistic(std::vector<double> s, const std::function<double(double)>& cdf) {
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double f = cdf(s[k]);
    d = std::max({d, std::abs(f - k / n), std::abs((k + 1) / n - f)});
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

double ks_critical_99(double n_eff) { return 1.628 / std::sqrt(n_eff); }

}  // namespace levyml::testing
