#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "vpp/aipp/coverage.hpp"
#include "vpp/aipp/sampler.hpp"

using namespace vpp::aipp;

namespace {

constexpr double kPi = std::numbers::pi;

// Midpoint-rule area of the union of disks (optionally clipped), on a fine
// grid restricted to the bounding box of the disks.
double grid_union_area(const std::vector<Vec2>& c, double rho, bool clipped, int per_rho = 200) {
  double x0 = 1e9, x1 = -1e9, y0 = 1e9, y1 = -1e9;
  for (const Vec2& p : c) {
    x0 = std::min(x0, p.x - rho);
    x1 = std::max(x1, p.x + rho);
    y0 = std::min(y0, p.y - rho);
    y1 = std::max(y1, p.y + rho);
  }
  if (clipped) {
    x0 = std::max(x0, 0.0);
    y0 = std::max(y0, 0.0);
    x1 = std::min(x1, 1.0);
    y1 = std::min(y1, 1.0);
  }
  const double h = rho / per_rho;
  double area = 0.0;
  for (double x = x0 + h / 2; x < x1; x += h)
    for (double y = y0 + h / 2; y < y1; y += h)
      for (const Vec2& p : c)
        if ((x - p.x) * (x - p.x) + (y - p.y) * (y - p.y) <= rho * rho) {
          area += h * h;
          break;
        }
  return area;
}

std::vector<Vec2> random_cluster(int n, double spread, std::uint64_t seed, Vec2 centre = {0.5, 0.5}) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-spread, spread);
  std::vector<Vec2> pts;
  for (int i = 0; i < n; ++i) pts.push_back({centre.x + u(gen), centre.y + u(gen)});
  return pts;
}

}  // namespace

TEST(Coverage, AnalyticCases) {
  const double rho = 0.01;
  EXPECT_NEAR(union_area({{0.5, 0.5}}, rho), kPi * rho * rho, 1e-16);
  EXPECT_NEAR(union_area({{0.5, 0.5}, {0.52, 0.5}}, rho), 2 * kPi * rho * rho, 1e-16);
  EXPECT_NEAR(union_area({{0.5, 0.5}, {0.7, 0.1}}, rho), 2 * kPi * rho * rho, 1e-16);
  const double lens_free = 2 * kPi * rho * rho - rho * rho * (2 * kPi / 3 - std::sqrt(3.0) / 2);
  EXPECT_NEAR(union_area({{0.5, 0.5}, {0.51, 0.5}}, rho), lens_free, 1e-16);
  EXPECT_NEAR(union_area({{0.5, 0.5}, {0.5, 0.5}}, rho), kPi * rho * rho, 1e-16);
  EXPECT_NEAR(uncovered_area({0.51, 0.5}, {{0.5, 0.5}}, rho), lens_free - kPi * rho * rho, 1e-16);
  EXPECT_EQ(union_area({}, rho), 0.0);
}

TEST(Coverage, MatchesGridOracle) {
  const double rho = 0.01;
  for (int trial = 0; trial < 6; ++trial) {
    const auto pts = random_cluster(3 + 4 * trial, 0.015 + 0.005 * trial, 100 + trial);
    const double exact = union_area(pts, rho);
    EXPECT_NEAR(exact, grid_union_area(pts, rho, false), 2e-3 * exact) << "trial " << trial;
    // Successive insertion agrees with the batch formula.
    double inc = 0.0;
    std::vector<Vec2> prefix;
    for (const Vec2& p : pts) {
      const double add = uncovered_area(p, prefix, rho);
      EXPECT_GE(add, 0.0);
      EXPECT_LE(add, kPi * rho * rho);
      inc += add;
      prefix.push_back(p);
    }
    EXPECT_NEAR(inc, exact, 1e-15);
  }
}

TEST(Coverage, ClippedMatchesGridOracle) {
  const double rho = 0.01;
  EXPECT_NEAR(union_area_clipped({{0.0, 0.0}}, rho), kPi * rho * rho / 4, 1e-4 * kPi * rho * rho);
  EXPECT_NEAR(union_area_clipped({{0.5, 1.0}}, rho), kPi * rho * rho / 2, 1e-4 * kPi * rho * rho);
  EXPECT_NEAR(union_area_clipped({{0.5, 0.5}}, rho), kPi * rho * rho, 1e-16);
  for (const Vec2 centre : {Vec2{0.005, 0.5}, Vec2{0.995, 0.995}, Vec2{0.01, 0.01}}) {
    const auto pts = random_cluster(10, 0.012, 7, centre);
    std::vector<Vec2> inside;
    for (const Vec2& p : pts)
      if (p.x >= 0 && p.x <= 1 && p.y >= 0 && p.y <= 1) inside.push_back(p);
    const double a = union_area_clipped(inside, rho);
    EXPECT_NEAR(a, grid_union_area(inside, rho, true), 3e-3 * a);
    EXPECT_LE(a, union_area(inside, rho) + 1e-15);
  }
}

TEST(Papangelou, SpecialCases) {
  AippParams unit;
  unit.beta = 37.0;
  unit.gamma1 = 1.0;
  const AippChain flat(unit, 1, random_cluster(20, 0.02, 3));
  for (const Vec2 u : {Vec2{0.5, 0.5}, Vec2{0.1, 0.9}, Vec2{0.505, 0.49}})
    EXPECT_EQ(flat.papangelou(u), 37.0);

  AippParams p;
  p.beta = 50.0;
  p.gamma1 = 1.5;
  const AippChain lone(p, 1, {{0.2, 0.2}});
  EXPECT_NEAR(lone.log_papangelou({0.8, 0.8}),
              std::log(50.0) - 1e4 * std::log(1.5) * kPi * 1e-4, 1e-12);

  std::vector<Vec2> ring;
  for (int k = 0; k < 8; ++k)
    ring.push_back({0.5 + 0.005 * std::cos(k * kPi / 4), 0.5 + 0.005 * std::sin(k * kPi / 4)});
  const AippChain covered(p, 1, ring);
  EXPECT_NEAR(covered.papangelou({0.5, 0.5}), 50.0, 1e-9);
}

TEST(Papangelou, DensityRatioConsistency) {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(0.45, 0.55);
  for (const bool clipped : {false, true}) {
    for (int trial = 0; trial < 40; ++trial) {
      AippParams p;
      p.beta = 10.0;
      p.gamma1 = trial % 2 ? 1.5 : 0.3;
      p.rho = 0.03;
      p.clipped = clipped;
      std::vector<Vec2> x;
      const int n = trial % 6;
      const double shift = clipped ? -0.45 : 0.0;
      for (int i = 0; i < n; ++i) x.push_back({u(gen) + shift, u(gen)});
      const Vec2 v{u(gen) + shift, u(gen)};
      const AippChain chain(p, 1, x);
      auto with = x;
      with.push_back(v);
      const double direct = std::log(p.beta) - p.log_gamma() * (coverage_area(with, p.rho, clipped) -
                                                                 coverage_area(x, p.rho, clipped));
      const double tol = clipped ? 1e-4 * kPi * p.rho * p.rho * std::abs(p.log_gamma()) : 1e-9;
      EXPECT_NEAR(chain.log_papangelou(v), direct, tol) << "trial " << trial;
      // Detailed balance: birth of v from x and death of v from x + v are inverse moves.
      const AippChain bigger(p, 1, with);
      EXPECT_NEAR(chain.log_birth_ratio(v) + bigger.log_death_ratio(with.size() - 1), 0.0, 1e-9);
      const double log_px = n * std::log(p.beta) - p.log_gamma() * coverage_area(x, p.rho, clipped);
      const double log_pw =
          (n + 1) * std::log(p.beta) - p.log_gamma() * coverage_area(with, p.rho, clipped);
      EXPECT_NEAR(chain.log_birth_ratio(v), log_pw - log_px - std::log(n + 1.0), tol);
    }
  }
}

TEST(Papangelou, CoverageIncrementBounds) {
  AippParams p;
  p.gamma1 = 1.2;
  AippChain chain(p, 5, random_cluster(200, 0.05, 8));
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.4, 0.6);
  for (int i = 0; i < 200; ++i) {
    const double da = (std::log(p.beta) - chain.log_papangelou({u(gen), u(gen)})) / p.log_gamma();
    EXPECT_GE(da, -1e-15);
    EXPECT_LE(da, kPi * p.rho * p.rho + 1e-15);
  }
}

TEST(Chain, PoissonWhenGammaIsOne) {
  AippParams p;
  p.beta = 50.0;
  p.gamma1 = 1.0;
  AippChain chain(p, 2718);
  chain.run(20'000);
  std::vector<double> counts;
  for (int s = 0; s < 4000; ++s) {
    chain.run(1000);
    counts.push_back(static_cast<double>(chain.size()));
  }
  double mean = 0.0, var = 0.0;
  for (const double c : counts) mean += c / counts.size();
  for (const double c : counts) var += (c - mean) * (c - mean) / (counts.size() - 1);
  EXPECT_LT(std::abs(autocorrelation(counts, 1)), 0.1);
  EXPECT_NEAR(mean, 50.0, 3.0 * std::sqrt(50.0 / counts.size()));
  EXPECT_GE(var / mean, 0.9);
  EXPECT_LE(var / mean, 1.1);
}

TEST(Chain, CoverageCacheMatchesBatch) {
  for (const bool clipped : {false, true}) {
    AippParams p;
    p.beta = clipped ? 400.0 : 2000.0;
    p.gamma1 = 1.2;
    p.clipped = clipped;
    AippChain chain(p, 31);
    chain.run(100'000);
    const double cached = chain.coverage();
    const double drift = chain.resync_coverage();
    const double tol = clipped ? 2e-4 * kPi * p.rho * p.rho * std::sqrt(chain.size()) : 1e-12;
    EXPECT_LT(std::abs(drift), tol) << "cached " << cached;
    EXPECT_GT(chain.size(), 0u);
  }
}

TEST(Chain, Determinism) {
  AippParams p;
  p.beta = 300.0;
  p.gamma1 = 0.8;
  AippChain a(p, 44), b(p, 44), c(p, 45);
  a.run(50'000);
  b.run(50'000);
  c.run(50'000);
  EXPECT_EQ(a.points(), b.points());
  EXPECT_EQ(a.coverage(), b.coverage());
  EXPECT_NE(a.points(), c.points());
}

TEST(Chain, RejectsBadParameters) {
  AippParams p;
  p.beta = 0.0;
  EXPECT_THROW(AippChain(p, 1), std::invalid_argument);
  p.beta = 1.0;
  p.rho = -0.1;
  EXPECT_THROW(AippChain(p, 1), std::invalid_argument);
  p.rho = 0.01;
  EXPECT_THROW(AippChain(p, 1, {{1.5, 0.5}}), std::invalid_argument);
  AippChain empty(AippParams{}, 1);
  // A death proposal on the empty pattern is a no-op.
  for (int i = 0; i < 10 && empty.size() == 0; ++i) {
    const auto before = empty.size();
    if (!empty.step()) EXPECT_EQ(empty.size(), before);
  }
}

TEST(Sample, PoissonLimitAndDiagnostics) {
  AippParams p;
  p.beta = 500.0;
  p.gamma1 = 1.0;
  const AippSample s = sample(p, 300'000, 77);
  EXPECT_NEAR(static_cast<double>(s.points.size()), 500.0, 4.0 * std::sqrt(500.0));
  EXPECT_EQ(s.diagnostics.count_trace.size(), 400u);
  EXPECT_FALSE(s.diagnostics.warning.has_value()) << *s.diagnostics.warning;
  EXPECT_LT(std::abs(s.diagnostics.coverage_drift), 1e-12);
  EXPECT_GT(s.diagnostics.acceptance_rate, 0.5);

  // A burn-in far too short to reach equilibrium is flagged.
  AippParams big;
  big.beta = 2000.0;
  const AippSample short_run = sample(big, 2000, 1);
  EXPECT_TRUE(short_run.diagnostics.warning.has_value());
}

TEST(Diagnostics, TraceStatistics) {
  std::vector<double> ramp, flat;
  for (int i = 0; i < 400; ++i) {
    ramp.push_back(i);
    flat.push_back(i % 2);
  }
  EXPECT_GT(trend_z(ramp), 5.0);
  EXPECT_NEAR(trend_z(flat), 0.0, 1e-12);
  EXPECT_NEAR(autocorrelation(flat, 1), -1.0, 0.01);
  EXPECT_NEAR(autocorrelation(flat, 2), 1.0, 0.01);
}

TEST(Tune, PoissonTarget) {
  AippParams p;
  p.beta = 50.0;
  p.gamma1 = 1.0;
  p.target_count = 200.0;
  TuneOptions opt;
  opt.round_burnin = 20'000;
  opt.round_measure = 200'000;
  const TuneResult r = tune_beta(p, 3, opt);
  EXPECT_NEAR(r.mean_count, 200.0, 0.02 * 200.0);
  EXPECT_NEAR(r.beta, 200.0, 0.06 * 200.0);
  EXPECT_FALSE(r.trace.empty());

  opt.tolerance_fraction = 0.0;
  EXPECT_THROW(tune_beta(p, 3, opt), std::invalid_argument);
  opt.tolerance_fraction = 0.02;
  opt.max_rounds = 1;
  p.beta = 1.0;
  try {
    tune_beta(p, 3, opt);
    ADD_FAILURE() << "expected failure";
  } catch (const TuneFailure& f) {
    EXPECT_EQ(f.trace.size(), 1u);
  }
}
