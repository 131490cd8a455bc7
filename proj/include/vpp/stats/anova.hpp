#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/distributions/fisher_f.hpp>

namespace vpp::stats {

struct AnovaEffect {
  std::string name;
  double ss = 0.0;
  double df = 0.0;
  double ms = 0.0;
  double F = 0.0;
  double p = 1.0;
};

/// Two-way fixed-effects table; effects are A, B, A:B, then error.
struct AnovaTable {
  std::string factor_a, factor_b;
  AnovaEffect a, b, ab, error;
  double ss_total = 0.0;
  std::size_t replicates = 0;
};

/// cells[i][j] holds the replicate responses at level i of A and j of B.
inline AnovaTable two_way_anova(const std::vector<std::vector<std::vector<double>>>& cells,
                                std::string factor_a = "A", std::string factor_b = "B") {
  const std::size_t I = cells.size();
  if (I < 2) throw std::invalid_argument("anova: factor A needs at least 2 levels");
  const std::size_t J = cells[0].size();
  if (J < 2) throw std::invalid_argument("anova: factor B needs at least 2 levels");
  const std::size_t K = cells[0][0].size();
  if (K < 2) throw std::invalid_argument("anova: needs at least 2 replicates per cell");
  for (const auto& row : cells) {
    if (row.size() != J) throw std::invalid_argument("anova: ragged factor levels");
    for (const auto& c : row)
      if (c.size() != K) throw std::invalid_argument("anova: unbalanced design");
  }

  std::vector<std::vector<double>> cell_mean(I, std::vector<double>(J, 0.0));
  std::vector<double> mean_a(I, 0.0), mean_b(J, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < I; ++i)
    for (std::size_t j = 0; j < J; ++j) {
      double s = 0.0;
      for (const double y : cells[i][j]) s += y;
      cell_mean[i][j] = s / static_cast<double>(K);
      mean_a[i] += cell_mean[i][j] / static_cast<double>(J);
      mean_b[j] += cell_mean[i][j] / static_cast<double>(I);
      grand += cell_mean[i][j] / static_cast<double>(I * J);
    }

  AnovaTable t;
  t.factor_a = std::move(factor_a);
  t.factor_b = std::move(factor_b);
  t.replicates = K;
  const double dI = static_cast<double>(I), dJ = static_cast<double>(J), dK = static_cast<double>(K);
  for (std::size_t i = 0; i < I; ++i) t.a.ss += dJ * dK * (mean_a[i] - grand) * (mean_a[i] - grand);
  for (std::size_t j = 0; j < J; ++j) t.b.ss += dI * dK * (mean_b[j] - grand) * (mean_b[j] - grand);
  for (std::size_t i = 0; i < I; ++i)
    for (std::size_t j = 0; j < J; ++j) {
      const double d = cell_mean[i][j] - mean_a[i] - mean_b[j] + grand;
      t.ab.ss += dK * d * d;
      for (const double y : cells[i][j]) {
        t.error.ss += (y - cell_mean[i][j]) * (y - cell_mean[i][j]);
        t.ss_total += (y - grand) * (y - grand);
      }
    }
  t.a.name = t.factor_a;
  t.b.name = t.factor_b;
  t.ab.name = t.factor_a + ":" + t.factor_b;
  t.error.name = "error";
  t.a.df = dI - 1;
  t.b.df = dJ - 1;
  t.ab.df = (dI - 1) * (dJ - 1);
  t.error.df = dI * dJ * (dK - 1);
  // Sums of squares at rounding level relative to the data are zero.
  double sum_sq = 0.0;
  for (const auto& row : cells)
    for (const auto& c : row)
      for (const double y : c) sum_sq += y * y;
  const double noise = 1e-13 * sum_sq;
  for (AnovaEffect* e : {&t.a, &t.b, &t.ab, &t.error})
    if (e->ss <= noise) e->ss = 0.0;
  for (AnovaEffect* e : {&t.a, &t.b, &t.ab, &t.error}) e->ms = e->ss / e->df;
  for (AnovaEffect* e : {&t.a, &t.b, &t.ab}) {
    if (e->ss <= 0.0) {
      e->F = 0.0;
      e->p = 1.0;
    } else if (t.error.ms <= 0.0) {
      e->F = std::numeric_limits<double>::infinity();
      e->p = 0.0;
    } else {
      e->F = e->ms / t.error.ms;
      const boost::math::fisher_f_distribution<double> dist(e->df, t.error.df);
      e->p = boost::math::cdf(boost::math::complement(dist, e->F));
    }
  }
  return t;
}

}  // namespace vpp::stats
