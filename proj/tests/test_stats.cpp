#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "support/geometry_oracles.hpp"
#include "vpp/geometry/tessellation.hpp"
#include "vpp/stats/anova.hpp"
#include "vpp/stats/cells.hpp"
#include "vpp/stats/curves.hpp"
#include "vpp/stats/gamma.hpp"
#include "vpp/stats/redundancy.hpp"
#include "vpp/stats/regression.hpp"

using namespace vpp::stats;
using vpp::geometry::Configuration;
using vpp::geometry::Domain;
using vpp::geometry::DomainKind;
using vpp::geometry::Tessellation;
using vpp::testing::perturbed_grid;
using vpp::testing::uniform_config;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> r(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return r;
}

bool nondecreasing(const std::vector<double>& v) {
  return std::is_sorted(v.begin(), v.end());
}

}  // namespace

TEST(Redundancy, Examples) {
  const std::vector<double> equal(4, 0.25);
  EXPECT_NEAR(thiel_redundancy(equal), 0.0, 1e-15);
  const std::vector<double> p = {0.5, 0.25, 0.25};
  EXPECT_NEAR(thiel_redundancy(p), std::log(3.0) - 1.5 * std::log(2.0), 1e-15);
  EXPECT_NEAR(thiel_redundancy(p), 0.05889, 1e-5);
  const std::vector<double> bad = {0.5, 0.0, 0.5};
  EXPECT_THROW(thiel_redundancy(bad), std::invalid_argument);
  EXPECT_THROW(thiel_redundancy(std::vector<double>{}), std::invalid_argument);
}

TEST(Redundancy, BoundsAndPermutation) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(2 + trial);
    for (auto& x : a) x = u(gen);
    const double r = thiel_redundancy(a);
    EXPECT_GE(r, 0.0);
    EXPECT_LT(r, std::log(static_cast<double>(a.size())));
    std::shuffle(a.begin(), a.end(), gen);
    EXPECT_NEAR(thiel_redundancy(a), r, 1e-13);
    for (auto& x : a) x *= 7.0;
    EXPECT_NEAR(thiel_redundancy(a), r, 1e-13);
  }
}

TEST(CellStats, EpmfExamples) {
  Configuration three;
  three.points = {{0.2, 0.3}, {0.7, 0.25}, {0.45, 0.8}};
  const auto t3 = Tessellation::build(three, Domain{DomainKind::unit_square});
  const Epmf e3 = nn_epmf(t3, all_ids(t3));
  ASSERT_EQ(e3.freq.size(), 1u);
  EXPECT_EQ(e3.freq.at(2), 1.0);
  EXPECT_THROW(nn_epmf(t3, {}), std::invalid_argument);

  const auto torus = Tessellation::build(uniform_config(2000, 5), Domain{DomainKind::torus});
  const Epmf et = nn_epmf(torus, all_ids(torus));
  double total = 0.0;
  for (const auto& [n, f] : et.freq) total += f;
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(et.mean(), 6.0, 1e-12);
}

TEST(CellStats, SquareDepthFilteredMeanDegree) {
  const auto t = Tessellation::build(uniform_config(2000, 6), Domain{DomainKind::unit_square});
  const Epmf e = nn_epmf(t, default_inclusion(t));
  EXPECT_NEAR(e.mean(), 6.0, 0.1);
}

TEST(CellStats, DepthFilter) {
  const auto grid = Tessellation::build(perturbed_grid(8, 0.05, 3), Domain{DomainKind::unit_square});
  EXPECT_EQ(depth_filter(grid, 1).size(), 64u);
  const auto inner = depth_filter(grid, 3);
  std::vector<std::size_t> expect;
  for (std::size_t j = 2; j < 6; ++j)
    for (std::size_t i = 2; i < 6; ++i) expect.push_back(j * 8 + i);
  std::vector<std::size_t> got = inner;
  std::sort(got.begin(), got.end());
  EXPECT_EQ(got, expect);
  for (int m = 1; m < 6; ++m) {
    const auto a = depth_filter(grid, m), b = depth_filter(grid, m + 1);
    EXPECT_TRUE(std::includes(a.begin(), a.end(), b.begin(), b.end()));
  }

  Configuration corners;
  corners.points = {{0.1, 0.1}, {0.9, 0.1}, {0.9, 0.9}, {0.1, 0.9}};
  const auto tc = Tessellation::build(corners, Domain{DomainKind::unit_square});
  EXPECT_TRUE(depth_filter(tc, 2).empty());

  const auto torus = Tessellation::build(uniform_config(20, 1), Domain{DomainKind::torus});
  EXPECT_THROW(depth_filter(torus, 3), vpp::geometry::UnsupportedDomain);
}

TEST(Curves, EmptySpaceExamples) {
  const Domain square{DomainKind::unit_square}, torus{DomainKind::torus};
  const auto pts = uniform_config(100, 8).points;
  const auto r = linspace(0.0, square.diameter(), 16);
  const auto F = empty_space_F(pts, r, square);
  EXPECT_EQ(F.front(), 0.0);
  EXPECT_EQ(F.back(), 1.0);
  EXPECT_TRUE(nondecreasing(F));
  EXPECT_THROW(empty_space_F(pts, {0.0, 2.0}, square), std::invalid_argument);
  EXPECT_THROW(empty_space_F({}, {0.0, 0.1}, square), std::invalid_argument);
  EXPECT_THROW(empty_space_F(pts, {0.1, 0.05}, square), std::invalid_argument);

  const std::vector<vpp::geometry::Vec2> centre = {{0.5, 0.5}};
  const auto Fc = empty_space_F(centre, {0.0, 0.1}, torus);
  // Grid-count error is bounded by the perimeter band of width one spacing.
  const double h = 1.0 / kDefaultReferenceGrid;
  EXPECT_NEAR(Fc[1], M_PI * 0.01, 2.0 * M_PI * 0.1 * h);
}

TEST(Curves, NearestNeighbourExamples) {
  const Domain square{DomainKind::unit_square}, torus{DomainKind::torus};
  const std::vector<vpp::geometry::Vec2> two = {{0.4, 0.5}, {0.6, 0.5}};
  const auto G = nn_distance_G(two, {0.0, 0.19, 0.21}, square, {0, 1});
  EXPECT_EQ(G[1], 0.0);
  EXPECT_EQ(G[2], 1.0);
  EXPECT_THROW(nn_distance_G({{0.5, 0.5}}, {0.0, 0.1}, square, {0}), std::invalid_argument);

  std::vector<vpp::geometry::Vec2> lattice;
  for (int j = 0; j < 20; ++j)
    for (int i = 0; i < 20; ++i) lattice.push_back({(i + 0.5) / 20, (j + 0.5) / 20});
  std::vector<std::size_t> ids(lattice.size());
  std::iota(ids.begin(), ids.end(), 0);
  const auto Gl = nn_distance_G(lattice, {0.0, 0.0499, 0.0501}, torus, ids);
  EXPECT_EQ(Gl[1], 0.0);
  EXPECT_EQ(Gl[2], 1.0);
}

TEST(Curves, PoissonNearestNeighbourBenchmark) {
  const Domain torus{DomainKind::torus};
  const auto r = linspace(0.0, 0.03, 31);
  std::vector<double> mean(r.size(), 0.0);
  for (int d = 0; d < 25; ++d) {
    const auto pts = uniform_config(2000, 500 + d).points;
    std::vector<std::size_t> ids(pts.size());
    std::iota(ids.begin(), ids.end(), 0);
    const auto G = nn_distance_G(pts, r, torus, ids);
    EXPECT_TRUE(nondecreasing(G));
    for (std::size_t k = 0; k < r.size(); ++k) mean[k] += G[k] / 25.0;
  }
  double sup = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k)
    sup = std::max(sup, std::abs(mean[k] - (1.0 - std::exp(-2000.0 * M_PI * r[k] * r[k]))));
  EXPECT_LT(sup, 0.03);
}

TEST(Curves, JEstimate) {
  const std::vector<double> r = {0.0, 0.1, 0.2, 0.3};
  const std::vector<double> F = {0.0, 0.5, 0.85, 0.9};
  const auto same = j_estimate(r, F, F);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_TRUE(same.mask[k]);
    EXPECT_NEAR(same.J[k], 1.0, 1e-15);
  }
  EXPECT_FALSE(same.mask[3]);
  const auto half = j_estimate(r, F, {0.0, 0.75, 0.9, 0.95});
  EXPECT_NEAR(half.J[1], 0.5, 1e-15);
  EXPECT_THROW(j_estimate(r, F, {0.0}), std::invalid_argument);
}

TEST(Curves, Averaging) {
  const std::vector<double> r = {0.0, 0.1};
  const auto a = j_estimate(r, {0.0, 0.5}, {0.0, 0.5});
  const auto b = j_estimate(r, {0.0, 0.5}, {0.0, -0.5});
  const auto same = average_curves({a, a, a});
  EXPECT_EQ(same.J, a.J);
  EXPECT_EQ(same.sd_J[1], 0.0);
  EXPECT_EQ(same.draws, 3u);
  const auto ab = average_curves({a, b});
  EXPECT_NEAR(ab.J[1], 2.0, 1e-15);
  EXPECT_NEAR(ab.sd_J[1], std::sqrt(2.0), 1e-15);
  auto masked = a;
  masked.mask[1] = 0;
  EXPECT_FALSE(average_curves({a, masked}).mask[1]);
  auto other = a;
  other.r = {0.0, 0.2};
  EXPECT_THROW(average_curves({a, other}), std::invalid_argument);
  EXPECT_THROW(average_curves({}), std::invalid_argument);
}

TEST(Curves, CompleteSpatialRandomnessGivesUnitJ) {
  const Domain square{DomainKind::unit_square};
  const auto pilot = uniform_config(2000, 900).points;
  const auto r = default_r_grid(pilot, square);
  ASSERT_EQ(r.size(), 64u);
  std::vector<CurveData> curves;
  for (int d = 0; d < 25; ++d) {
    const auto cfg = uniform_config(2000, 1000 + d);
    const auto t = Tessellation::build(cfg, square);
    const auto c = estimate_curve(cfg.points, r, square, default_inclusion(t));
    EXPECT_TRUE(nondecreasing(c.F));
    EXPECT_TRUE(nondecreasing(c.G));
    for (std::size_t k = 0; k < r.size(); ++k) EXPECT_EQ(c.F[k] <= kReliableF, c.J[k] == c.J[k]);
    curves.push_back(c);
  }
  const auto avg = average_curves(curves);
  std::size_t masked = 0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (!avg.mask[k]) continue;
    ++masked;
    EXPECT_LE(std::abs(avg.lnJ[k]), 0.1) << "r = " << r[k];
  }
  EXPECT_GT(masked, 40u);
  const auto fit = smooth_lnJ(avg);
  EXPECT_EQ(fit.coefficients.size(), 4u);
}

TEST(Regression, ExactCubicRecovery) {
  const std::vector<double> truth = {0.3, -1.2, 2.5, -0.7};
  std::vector<double> xs, ys, ws;
  for (int i = 0; i < 40; ++i) {
    const double x = 0.01 * i;
    xs.push_back(x);
    ys.push_back(truth[0] + x * (truth[1] + x * (truth[2] + x * truth[3])));
    ws.push_back(1.0 + (i % 5));
  }
  const auto fit = weighted_poly_regression(xs, ys, ws);
  ASSERT_EQ(fit.coefficients.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(fit.coefficients[k], truth[k], 1e-9);
  EXPECT_LT(fit.weighted_rss, 1e-18);

  std::vector<double> scaled = ws;
  for (auto& w : scaled) w *= 123.0;
  const auto fit2 = weighted_poly_regression(xs, ys, scaled);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(fit2.coefficients[k], fit.coefficients[k], 1e-9);
}

TEST(Regression, ConstantAndNoisyData) {
  const std::vector<double> xs = {0.0, 0.1, 0.2, 0.3, 0.5, 0.8};
  const auto fit = weighted_poly_regression(xs, std::vector<double>(6, 2.5), std::vector<double>(6, 1.0));
  EXPECT_NEAR(fit.coefficients[0], 2.5, 1e-9);
  for (std::size_t k = 1; k < 4; ++k) EXPECT_NEAR(fit.coefficients[k], 0.0, 1e-9);

  std::mt19937_64 gen(4);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::vector<double> x, y, w;
  for (int i = 0; i < 30; ++i) {
    x.push_back(i / 29.0);
    y.push_back(std::sin(3 * x.back()) + noise(gen));
    w.push_back(0.5 + (i % 3));
  }
  const auto f = weighted_poly_regression(x, y, w);
  // Weighted residuals are orthogonal to every basis column.
  for (int k = 0; k <= 3; ++k) {
    double dot = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      dot += w[i] * (y[i] - f(x[i])) * std::pow(x[i], k);
      scale += w[i] * std::abs(y[i]) * std::pow(x[i], k);
    }
    EXPECT_LT(std::abs(dot), 1e-9 * scale);
  }
  EXPECT_THROW(weighted_poly_regression({0.1, 0.1, 0.1, 0.1, 0.1}, std::vector<double>(5, 1.0),
                                        std::vector<double>(5, 1.0)),
               std::domain_error);
  EXPECT_THROW(weighted_poly_regression({0.1, 0.2}, {1.0, 2.0}, {1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(weighted_poly_regression(xs, std::vector<double>(6, 1.0), {1, 1, 1, 1, 1, 0}),
               std::invalid_argument);
}

TEST(Gamma, PolygammaAgainstReference) {
  for (double x = 0.01; x < 60.0; x *= 1.37) {
    EXPECT_NEAR(digamma(x), boost::math::digamma(x), 1e-12 * std::max(1.0, std::abs(digamma(x))));
    EXPECT_NEAR(trigamma(x), boost::math::trigamma(x), 1e-11 * std::max(1.0, trigamma(x)));
  }
}

TEST(Gamma, ShapeMle) {
  std::mt19937_64 gen(2024);
  std::gamma_distribution<double> g(2.0, 0.37);
  std::vector<double> s(1'000'000);
  for (auto& v : s) v = g(gen);
  const double k = gamma_shape_mle(s);
  EXPECT_GE(k, 1.99);
  EXPECT_LE(k, 2.01);
  for (const double c : {1e-3, 5.0, 1e6}) {
    std::vector<double> t = s;
    for (auto& v : t) v *= c;
    EXPECT_NEAR(gamma_shape_mle(t), k, 1e-9);
  }
  // The returned shape solves the likelihood equation.
  double m = 0.0, ml = 0.0;
  for (const double v : s) {
    m += v;
    ml += std::log(v);
  }
  m /= s.size();
  ml /= s.size();
  EXPECT_NEAR(std::log(k) - digamma(k), std::log(m) - ml, 1e-10);
  EXPECT_THROW(gamma_shape_mle(std::vector<double>(10, 0.3)), ShapeOutOfRange);
  EXPECT_THROW(gamma_shape_mle(std::vector<double>{1.0}), std::invalid_argument);
  EXPECT_THROW(gamma_shape_mle(std::vector<double>{1.0, -1.0}), std::invalid_argument);
}

TEST(Anova, HandComputedTable) {
  const std::vector<std::vector<std::vector<double>>> cells = {{{2, 4}, {6, 8}},
                                                               {{3, 5}, {11, 13}}};
  const AnovaTable t = two_way_anova(cells, "depth", "selection");
  EXPECT_NEAR(t.a.ss, 18.0, 1e-12);
  EXPECT_NEAR(t.b.ss, 72.0, 1e-12);
  EXPECT_NEAR(t.ab.ss, 8.0, 1e-12);
  EXPECT_NEAR(t.error.ss, 8.0, 1e-12);
  EXPECT_NEAR(t.ss_total, 106.0, 1e-12);
  EXPECT_EQ(t.error.df, 4.0);
  EXPECT_NEAR(t.a.F, 9.0, 1e-12);
  EXPECT_NEAR(t.b.F, 36.0, 1e-12);
  EXPECT_NEAR(t.ab.F, 4.0, 1e-12);
  EXPECT_GT(t.a.p, 0.03);
  EXPECT_LT(t.a.p, 0.05);
  EXPECT_EQ(t.ab.name, "depth:selection");
}

TEST(Anova, DegenerateAndInvalid) {
  const std::vector<std::vector<std::vector<double>>> flat(3, std::vector<std::vector<double>>(
                                                                 2, std::vector<double>(4, 0.1)));
  const AnovaTable t = two_way_anova(flat);
  for (const auto* e : {&t.a, &t.b, &t.ab}) {
    EXPECT_EQ(e->F, 0.0);
    EXPECT_EQ(e->p, 1.0);
  }
  auto unbalanced = flat;
  unbalanced[1][0].push_back(0.2);
  EXPECT_THROW(two_way_anova(unbalanced), std::invalid_argument);
  const std::vector<std::vector<std::vector<double>>> single = {{{1}, {2}}, {{3}, {4}}};
  EXPECT_THROW(two_way_anova(single), std::invalid_argument);
}

TEST(Anova, PartitionIdentity) {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> n(1.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<std::vector<double>>> cells(
        2 + trial % 3, std::vector<std::vector<double>>(2 + trial % 4, std::vector<double>(3 + trial % 2)));
    for (auto& row : cells)
      for (auto& c : row)
        for (auto& y : c) y = n(gen);
    const AnovaTable t = two_way_anova(cells);
    EXPECT_NEAR(t.a.ss + t.b.ss + t.ab.ss + t.error.ss, t.ss_total, 1e-9);
    EXPECT_GE(t.a.p, 0.0);
    EXPECT_LE(t.a.p, 1.0);
  }
}
