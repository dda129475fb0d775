#include "levyml/stable.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "levyml/error.hpp"

namespace levyml {

void StableSpec::validate() const {
  std::vector<std::string> bad;
  if (!(alpha > 0.0 && alpha <= 2.0)) bad.emplace_back("alpha must lie in (0, 2]");
  if (!(sigma >= 0.0)) bad.emplace_back("sigma must be >= 0");
  if (!bad.empty()) {
    std::ostringstream os;
    for (std::size_t i = 0; i < bad.size(); ++i) os << (i ? "; " : "") << bad[i];
    throw Error(ErrorCode::ValidationError, os.str());
  }
}

double c_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) {
    std::ostringstream os;
    os << "c_alpha needs 0 < alpha < 2, got " << alpha;
    throw Error(ErrorCode::OutOfRange, os.str());
  }
  return alpha * std::tgamma(0.5 * (1.0 + alpha)) /
         (std::pow(2.0, 1.0 - alpha) * std::sqrt(std::numbers::pi) * std::tgamma(1.0 - 0.5 * alpha));
}

double jump_measure_density(double alpha, double y) {
  if (y == 0.0) throw Error(ErrorCode::SingularAtZero, "jump measure is singular at y = 0");
  return c_alpha(alpha) / std::pow(std::abs(y), 1.0 + alpha);
}

double sample_standard(double alpha, Stream& rng) {
  const double v = std::numbers::pi * (rng.uniform_open() - 0.5);
  const double w = -std::log(rng.uniform_open());
  if (alpha == 1.0) return std::tan(v);
  return std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
         std::pow(std::cos(v - alpha * v) / w, (1.0 - alpha) / alpha);
}

double increment(const StableSpec& spec, double dt, Stream& rng) {
  const double x = sample_standard(spec.alpha, rng);
  if (spec.sigma == 0.0) return 0.0;
  return spec.sigma * std::pow(dt, 1.0 / spec.alpha) * x;
}

double tail_constant(double alpha, double sigma) {
  return c_alpha(alpha) * std::pow(sigma, alpha) / alpha;
}

double tail_constant_classical(double alpha, double sigma) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw Error(ErrorCode::OutOfRange, "tail constant needs 0 < alpha < 2");
  const double c = alpha == 1.0 ? 2.0 / std::numbers::pi
                                : (1.0 - alpha) / (std::tgamma(2.0 - alpha) * std::cos(0.5 * std::numbers::pi * alpha));
  return 0.5 * c * std::pow(sigma, alpha);
}

TailEstimate tail_diagnostic(double alpha, double sigma, std::span<const double> samples, double y) {
  if (samples.size() < 100000) throw Error(ErrorCode::InsufficientSamples, "tail diagnostic needs >= 1e5 samples");
  if (!(alpha > 0.0 && alpha < 2.0)) throw Error(ErrorCode::OutOfRange, "tail diagnostic needs 0 < alpha < 2");
  TailEstimate est;
  est.y = y;
  for (double x : samples) {
    est.count_right += x > y;
    est.count_left += x < -y;
  }
  const double n = static_cast<double>(samples.size());
  const double scale = std::pow(y, alpha);
  const double pr = static_cast<double>(est.count_right) / n;
  const double pl = static_cast<double>(est.count_left) / n;
  est.right = scale * pr;
  est.left = scale * pl;
  est.right_stderr = scale * std::sqrt(pr * (1.0 - pr) / n);
  est.left_stderr = scale * std::sqrt(pl * (1.0 - pl) / n);
  est.theory = tail_constant(alpha, sigma);
  return est;
}

double survival_slope(std::span<const double> samples, double y_lo, double y_hi, int points) {
  std::vector<double> mags(samples.size());
  std::transform(samples.begin(), samples.end(), mags.begin(), [](double x) { return std::abs(x); });
  std::sort(mags.begin(), mags.end());
  const double n = static_cast<double>(mags.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int used = 0;
  for (int k = 0; k < points; ++k) {
    const double y = y_lo * std::pow(y_hi / y_lo, static_cast<double>(k) / (points - 1));
    const auto above = static_cast<double>(mags.end() - std::upper_bound(mags.begin(), mags.end(), y));
    if (above == 0) continue;
    const double lx = std::log(y), ly = std::log(above / n);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++used;
  }
  if (used < 2) throw Error(ErrorCode::InsufficientSamples, "no exceedances in the fitting range");
  return (used * sxy - sx * sy) / (used * sxx - sx * sx);
}

std::vector<TailRow> tail_table(double alpha, double sigma, std::span<const double> samples,
                                std::span<const double> levels) {
  std::vector<TailRow> rows;
  const double theory = tail_constant(alpha, sigma);
  const double n = static_cast<double>(samples.size());
  for (double y : levels) {
    const auto above = std::count_if(samples.begin(), samples.end(), [y](double x) { return x > y; });
    rows.push_back({y, static_cast<double>(above) / n, theory / std::pow(y, alpha)});
  }
  return rows;
}

}  // namespace levyml
