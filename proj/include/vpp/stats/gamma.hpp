#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

namespace vpp::stats {

/// psi(x) for x > 0: shift up to x >= 10, then the asymptotic series.
inline double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma: argument must be positive");
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double f = 1.0 / (x * x);
  const double series =
      f * (1.0 / 12 - f * (1.0 / 120 - f * (1.0 / 252 - f * (1.0 / 240 - f * (1.0 / 132)))));
  return acc + std::log(x) - 0.5 / x - series;
}

inline double trigamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("trigamma: argument must be positive");
  double acc = 0.0;
  while (x < 10.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double f = 1.0 / (x * x);
  const double series =
      1.0 / x + f / 2.0 +
      f / x * (1.0 / 6 - f * (1.0 / 30 - f * (1.0 / 42 - f * (1.0 / 30 - f * (5.0 / 66)))));
  return acc + series;
}

/// Thrown when the shape MLE has no finite solution (e.g. constant data).
class ShapeOutOfRange : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Maximum-likelihood Gamma shape: solves ln k - psi(k) = ln(mean) - mean(ln).
inline double gamma_shape_mle(std::span<const double> samples, double tolerance = 1e-10) {
  if (samples.size() < 2) throw std::invalid_argument("gamma_shape_mle: needs at least 2 samples");
  double sum = 0.0, sum_log = 0.0;
  for (const double v : samples) {
    if (!(v > 0.0)) throw std::invalid_argument("gamma_shape_mle: samples must be positive");
    sum += v;
    sum_log += std::log(v);
  }
  const double n = static_cast<double>(samples.size());
  const double s = std::log(sum / n) - sum_log / n;
  if (!(s > 1e-14)) throw ShapeOutOfRange("gamma_shape_mle: samples are (numerically) equal");

  double k = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
  for (int it = 0; it < 200; ++it) {
    const double g = std::log(k) - digamma(k) - s;
    const double dg = 1.0 / k - trigamma(k);
    double next = k - g / dg;
    if (!(next > 0.0)) next = 0.5 * k;
    if (std::abs(next - k) <= tolerance * k) return next;
    k = next;
  }
  throw ShapeOutOfRange("gamma_shape_mle: Newton iteration did not converge");
}

}  // namespace vpp::stats
