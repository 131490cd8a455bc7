#pragma once

// Area-interaction point process on the unit square, density proportional to
// beta^n(x) * gamma^(-A(x)) where A(x) is the area of the union of radius-rho
// disks centred at the points, sampled by a birth-death Metropolis-Hastings
// chain.
//
// Random draw order per proposal: move-type uniform; then the birth location
// (x, y) or the death index; then the acceptance uniform.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vpp/aipp/coverage.hpp"
#include "vpp/geometry/tessellation.hpp"
#include "vpp/random.hpp"

namespace vpp::aipp {

struct AippParams {
  double beta = 2000.0;
  double gamma1 = 1.0;
  double gamma_exponent = 1e4;
  double rho = 0.01;
  double target_count = 2000.0;
  bool clipped = false;  // intersect the disk union with the unit square

  /// ln gamma = exponent * ln gamma1, kept in log space.
  double log_gamma() const { return gamma_exponent * std::log(gamma1); }

  void validate() const {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("aipp: beta must be positive");
    if (!(gamma1 > 0.0)) throw std::invalid_argument("aipp: gamma1 must be positive");
    if (!(rho > 0.0)) throw std::invalid_argument("aipp: rho must be positive");
    if (!std::isfinite(log_gamma())) throw std::invalid_argument("aipp: gamma overflows");
  }
};

/// Bucket grid over the unit square with buckets no smaller than `cell`.
class SpatialHash {
 public:
  explicit SpatialHash(double cell = 0.01)
      : res_(std::max(1, static_cast<int>(std::floor(1.0 / cell)))),
        buckets_(static_cast<std::size_t>(res_) * res_) {}

  void insert(std::uint32_t id, Vec2 p) { buckets_[slot(p)].push_back(id); }
  void erase(std::uint32_t id, Vec2 p) {
    auto& b = buckets_[slot(p)];
    b.erase(std::find(b.begin(), b.end(), id));
  }
  void relabel(std::uint32_t from, std::uint32_t to, Vec2 p) {
    auto& b = buckets_[slot(p)];
    *std::find(b.begin(), b.end(), from) = to;
  }

  /// Ids in the 5 x 5 block of buckets around p.
  template <class F>
  void for_each_near(Vec2 p, F&& f) const {
    const int cx = coord(p.x), cy = coord(p.y);
    for (int y = std::max(0, cy - 2); y <= std::min(res_ - 1, cy + 2); ++y)
      for (int x = std::max(0, cx - 2); x <= std::min(res_ - 1, cx + 2); ++x)
        for (const std::uint32_t id : buckets_[static_cast<std::size_t>(y) * res_ + x]) f(id);
  }

 private:
  int coord(double u) const {
    return std::clamp(static_cast<int>(std::floor(u * res_)), 0, res_ - 1);
  }
  std::size_t slot(Vec2 p) const {
    return static_cast<std::size_t>(coord(p.y)) * res_ + coord(p.x);
  }

  int res_;
  std::vector<std::vector<std::uint32_t>> buckets_;
};

/// Coverage area A(x) under the chosen clipping mode (direct computation).
inline double coverage_area(const std::vector<Vec2>& points, double rho, bool clipped = false) {
  if (!(rho > 0.0)) throw std::invalid_argument("coverage_area: rho must be positive");
  return clipped ? union_area_clipped(points, rho) : union_area(points, rho);
}

class AippChain {
 public:
  AippChain(AippParams params, std::uint64_t seed, std::vector<Vec2> initial = {})
      : params_(params), rng_(seed), hash_(params.rho) {
    params_.validate();
    for (const Vec2& p : initial) {
      if (p.x < 0.0 || p.x > 1.0 || p.y < 0.0 || p.y > 1.0)
        throw std::invalid_argument("aipp: initial point outside the unit square");
      coverage_ += new_area(p, kNoExclusion);
      add(p);
    }
  }

  const AippParams& params() const { return params_; }
  void set_beta(double beta) {
    params_.beta = beta;
    params_.validate();
  }
  const std::vector<Vec2>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  double coverage() const { return coverage_; }
  std::uint64_t steps() const { return steps_; }
  std::uint64_t accepted() const { return accepted_; }
  const Rng& rng() const { return rng_; }

  /// ln of the Papangelou intensity at u (not a current point).
  double log_papangelou(Vec2 u) const {
    return std::log(params_.beta) - params_.log_gamma() * new_area(u, kNoExclusion);
  }
  double papangelou(Vec2 u) const {
    return params_.beta * std::exp(-params_.log_gamma() * new_area(u, kNoExclusion));
  }

  /// ln of the acceptance ratio for adding u: lambda*(u; x) / (n + 1).
  double log_birth_ratio(Vec2 u) const {
    return log_papangelou(u) - std::log(static_cast<double>(points_.size() + 1));
  }
  /// ln of the acceptance ratio for deleting point i: n / lambda*(x_i; x \ x_i).
  double log_death_ratio(std::size_t i) const {
    const double da = new_area(points_.at(i), static_cast<std::uint32_t>(i));
    return std::log(static_cast<double>(points_.size())) -
           (std::log(params_.beta) - params_.log_gamma() * da);
  }

  /// One birth-or-death proposal; returns true when accepted.
  bool step() {
    ++steps_;
    if (rng_.uniform() < 0.5) {
      const Vec2 u{rng_.uniform(), rng_.uniform()};
      const double da = new_area(u, kNoExclusion);
      const double log_ratio = std::log(params_.beta) - params_.log_gamma() * da -
                               std::log(static_cast<double>(points_.size() + 1));
      if (!accept(log_ratio)) return false;
      coverage_ += da;
      add(u);
    } else {
      if (points_.empty()) return false;
      const auto i = static_cast<std::uint32_t>(rng_.below(points_.size()));
      const double da = new_area(points_[i], i);
      const double log_ratio = std::log(static_cast<double>(points_.size())) -
                               (std::log(params_.beta) - params_.log_gamma() * da);
      if (!accept(log_ratio)) return false;
      coverage_ -= da;
      remove(i);
    }
    ++accepted_;
    return true;
  }

  void run(std::uint64_t proposals) {
    for (std::uint64_t s = 0; s < proposals; ++s) step();
  }

  /// Recomputes the coverage from scratch; returns the cache drift.
  double resync_coverage() {
    const double fresh = coverage_area(points_, params_.rho, params_.clipped);
    const double drift = coverage_ - fresh;
    coverage_ = fresh;
    return drift;
  }

 private:
  static constexpr std::uint32_t kNoExclusion = std::numeric_limits<std::uint32_t>::max();

  bool accept(double log_ratio) {
    const double u = rng_.uniform();
    return log_ratio >= 0.0 || std::log(u) < log_ratio;
  }

  double new_area(Vec2 u, std::uint32_t exclude) const {
    scratch_.clear();
    hash_.for_each_near(u, [&](std::uint32_t id) {
      if (id != exclude) scratch_.push_back(points_[id]);
    });
    return params_.clipped ? uncovered_area_clipped(u, scratch_, params_.rho)
                           : uncovered_area(u, scratch_, params_.rho);
  }

  void add(Vec2 p) {
    hash_.insert(static_cast<std::uint32_t>(points_.size()), p);
    points_.push_back(p);
  }

  void remove(std::uint32_t i) {
    hash_.erase(i, points_[i]);
    const auto last = static_cast<std::uint32_t>(points_.size() - 1);
    if (i != last) {
      hash_.relabel(last, i, points_[last]);
      points_[i] = points_[last];
    }
    points_.pop_back();
  }

  AippParams params_;
  Rng rng_;
  SpatialHash hash_;
  std::vector<Vec2> points_;
  double coverage_ = 0.0;
  std::uint64_t steps_ = 0;
  std::uint64_t accepted_ = 0;
  mutable std::vector<Vec2> scratch_;
};

/// Lag-k autocorrelation of a trace.
inline double autocorrelation(const std::vector<double>& x, std::size_t lag) {
  if (x.size() <= lag + 1) return std::numeric_limits<double>::quiet_NaN();
  double mean = 0.0;
  for (const double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    den += (x[i] - mean) * (x[i] - mean);
    if (i + lag < x.size()) num += (x[i] - mean) * (x[i + lag] - mean);
  }
  return den > 0.0 ? num / den : 0.0;
}

/// Batch-means z-score comparing the two halves of a trace; large values
/// indicate the trace has not settled.
inline double trend_z(const std::vector<double>& x, std::size_t batches_per_half = 10) {
  const std::size_t half = x.size() / 2;
  const std::size_t len = half / batches_per_half;
  if (len == 0) return 0.0;
  auto half_stats = [&](std::size_t start, double& mean, double& var_of_mean) {
    std::vector<double> bm;
    for (std::size_t b = 0; b < batches_per_half; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < len; ++i) s += x[start + b * len + i];
      bm.push_back(s / static_cast<double>(len));
    }
    mean = 0.0;
    for (const double v : bm) mean += v / static_cast<double>(bm.size());
    double ss = 0.0;
    for (const double v : bm) ss += (v - mean) * (v - mean);
    var_of_mean = ss / static_cast<double>(bm.size() - 1) / static_cast<double>(bm.size());
  };
  double m1, v1, m2, v2;
  half_stats(0, m1, v1);
  half_stats(half, m2, v2);
  const double se = std::sqrt(v1 + v2);
  if (se == 0.0) return m1 == m2 ? 0.0 : std::numeric_limits<double>::infinity();
  return (m2 - m1) / se;
}

struct SampleDiagnostics {
  std::uint64_t burnin = 0;
  std::uint64_t trace_period = 0;
  std::vector<double> count_trace;
  std::vector<double> coverage_trace;
  double acceptance_rate = 0.0;
  double count_lag1 = 0.0;  // at the trace period
  double trend_z = 0.0;     // over the second half of burn-in
  double coverage_drift = 0.0;
  std::optional<std::string> warning;
};

struct AippSample {
  std::vector<Vec2> points;
  double coverage = 0.0;
  SampleDiagnostics diagnostics;
};

inline constexpr std::uint64_t kDefaultBurnin = 2'000'000;
inline constexpr double kTrendThreshold = 3.0;

/// Runs the chain for `burnin` proposals from `initial` (default empty) and
/// returns the final configuration with diagnostics.
inline AippSample sample(const AippParams& params, std::uint64_t burnin, std::uint64_t seed,
                         std::vector<Vec2> initial = {}, std::uint64_t trace_points = 400) {
  AippChain chain(params, seed, std::move(initial));
  AippSample out;
  auto& d = out.diagnostics;
  d.burnin = burnin;
  d.trace_period = std::max<std::uint64_t>(1, burnin / std::max<std::uint64_t>(1, trace_points));
  for (std::uint64_t s = 1; s <= burnin; ++s) {
    chain.step();
    if (s % d.trace_period == 0) {
      d.count_trace.push_back(static_cast<double>(chain.size()));
      d.coverage_trace.push_back(chain.coverage());
    }
  }
  d.acceptance_rate = burnin ? static_cast<double>(chain.accepted()) / burnin : 0.0;
  d.coverage_drift = chain.resync_coverage();
  const std::vector<double> tail(d.count_trace.begin() + d.count_trace.size() / 2,
                                 d.count_trace.end());
  d.count_lag1 = autocorrelation(tail, 1);
  d.trend_z = trend_z(tail);
  if (std::abs(d.trend_z) > kTrendThreshold)
    d.warning = "point count still trending at the end of burn-in (z = " +
                std::to_string(d.trend_z) + ")";
  out.points = chain.points();
  out.coverage = chain.coverage();
  return out;
}

struct TuneRound {
  double beta = 0.0;
  double mean_count = 0.0;
};

struct TuneResult {
  double beta = 0.0;
  double mean_count = 0.0;
  std::vector<TuneRound> trace;
  std::vector<Vec2> state;  // chain state at the end of the last round
};

class TuneFailure : public std::runtime_error {
 public:
  TuneFailure(const std::string& what, std::vector<TuneRound> trace)
      : std::runtime_error(what), trace(std::move(trace)) {}
  std::vector<TuneRound> trace;
};

struct TuneOptions {
  double tolerance_fraction = 0.02;
  int max_rounds = 40;
  std::uint64_t round_burnin = 200'000;
  std::uint64_t round_measure = 400'000;
  std::uint64_t measure_period = 200;
  double gain = 1.0;
};

/// Robbins-Monro search on ln beta for a stationary mean count equal to the
/// target. The chain is carried over between rounds.
inline TuneResult tune_beta(AippParams params, std::uint64_t seed, const TuneOptions& opt = {}) {
  if (!(opt.tolerance_fraction > 0.0))
    throw std::invalid_argument("tune_beta: tolerance must be positive");
  if (!(params.target_count > 0.0))
    throw std::invalid_argument("tune_beta: target count must be positive");
  if (opt.max_rounds < 1) throw std::invalid_argument("tune_beta: needs at least one round");
  AippChain chain(params, seed);
  double log_beta = std::log(params.beta);
  TuneResult result;
  for (int round = 0; round < opt.max_rounds; ++round) {
    chain.set_beta(std::exp(log_beta));
    chain.run(opt.round_burnin);
    double sum = 0.0;
    std::uint64_t n = 0;
    for (std::uint64_t s = 1; s <= opt.round_measure; ++s) {
      chain.step();
      if (s % opt.measure_period == 0) {
        sum += static_cast<double>(chain.size());
        ++n;
      }
    }
    const double mean = sum / static_cast<double>(n);
    result.trace.push_back({std::exp(log_beta), mean});
    if (std::abs(mean / params.target_count - 1.0) <= opt.tolerance_fraction) {
      result.beta = std::exp(log_beta);
      result.mean_count = mean;
      result.state = chain.points();
      return result;
    }
    const double step = opt.gain / std::pow(1.0 + round, 0.6);
    log_beta -= step * (std::log(std::max(mean, 1.0)) - std::log(params.target_count));
  }
  throw TuneFailure("tune_beta: no beta within tolerance after " +
                        std::to_string(opt.max_rounds) + " rounds",
                    std::move(result.trace));
}

}  // namespace vpp::aipp
