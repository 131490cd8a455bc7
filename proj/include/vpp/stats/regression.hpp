#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace vpp::stats {

/// Polynomial fit; coefficients[k] multiplies x^k.
struct RegressionFit {
  int degree = 3;
  std::vector<double> coefficients;
  double weighted_rss = 0.0;

  double operator()(double x) const {
    double y = 0.0;
    for (std::size_t k = coefficients.size(); k-- > 0;) y = y * x + coefficients[k];
    return y;
  }
};

/// Minimises sum w_i (y_i - p(x_i))^2 over polynomials of the given degree.
inline RegressionFit weighted_poly_regression(const std::vector<double>& xs,
                                              const std::vector<double>& ys,
                                              const std::vector<double>& weights,
                                              int degree = 3) {
  const std::size_t n = xs.size();
  if (degree < 0) throw std::invalid_argument("regression: negative degree");
  if (ys.size() != n || weights.size() != n)
    throw std::invalid_argument("regression: inputs differ in length");
  if (n < static_cast<std::size_t>(degree) + 1)
    throw std::invalid_argument("regression: fewer points than coefficients");
  for (const double w : weights)
    if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("regression: weights must be positive");

  // Fit in t = (x - c) / s for conditioning, then expand back to powers of x.
  double lo = xs[0], hi = xs[0];
  for (const double x : xs) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  const double c = 0.5 * (lo + hi);
  const double s = hi > lo ? 0.5 * (hi - lo) : 1.0;
  const int m = degree + 1;
  Eigen::MatrixXd A(static_cast<Eigen::Index>(n), m);
  Eigen::VectorXd b(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double sw = std::sqrt(weights[i]);
    const double t = (xs[i] - c) / s;
    double p = 1.0;
    for (int k = 0; k < m; ++k, p *= t) A(static_cast<Eigen::Index>(i), k) = sw * p;
    b(static_cast<Eigen::Index>(i)) = sw * ys[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-12);
  if (qr.rank() < m) throw std::domain_error("regression: rank-deficient design");
  const Eigen::VectorXd beta = qr.solve(b);

  // p(x) = sum_k beta_k ((x - c)/s)^k, expanded by the binomial theorem.
  std::vector<double> coef(static_cast<std::size_t>(m), 0.0);
  for (int k = 0; k < m; ++k) {
    const double bk = beta(k) / std::pow(s, k);
    double binom = 1.0;
    for (int j = 0; j <= k; ++j) {
      coef[static_cast<std::size_t>(j)] += bk * binom * std::pow(-c, k - j);
      binom = binom * (k - j) / (j + 1);
    }
  }
  RegressionFit fit;
  fit.degree = degree;
  fit.coefficients = std::move(coef);
  const Eigen::VectorXd r = A * beta - b;
  fit.weighted_rss = r.squaredNorm();
  return fit;
}

}  // namespace vpp::stats
