#pragma once

// Voronoi point process dynamics: each step culls one point with probability
// proportional to its cell's selection weight and places a replacement
// uniformly on the domain.
//
// Random draw order per step (part of the reproducibility contract):
//   1. one uniform for the cull draw;
//   2. the placement coordinates (x, then y on planar domains);
//   3. further placement coordinates for every proximity redraw.

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vpp/dynamics/fenwick.hpp"
#include "vpp/dynamics/selection.hpp"
#include "vpp/geometry/tessellation.hpp"
#include "vpp/random.hpp"

namespace vpp::dynamics {

using geometry::Configuration;
using geometry::Domain;
using geometry::DomainKind;
using geometry::Tessellation;
using geometry::Vec2;

struct StepRecord {
  std::uint64_t step = 0;  // 1-based index of the step just taken
  std::size_t culled = 0;
  double weight_share = 0.0;  // S(C_culled) / sum S
  Vec2 new_point;
  unsigned redraws = 0;
};

class VoronoiProcess {
 public:
  VoronoiProcess(Tessellation tess, SelectionSpec spec, std::uint64_t seed)
      : tess_(std::move(tess)), spec_(spec), rng_(seed) {
    std::vector<double> w(tess_.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = selection_weight(spec_, tess_.cell(i));
    index_ = WeightIndex(std::move(w));
    check_total();
  }

  /// N i.i.d. uniform points on the domain; the same seed stream then drives
  /// the dynamics.
  static VoronoiProcess init_uniform(std::size_t n, Domain domain, SelectionSpec spec,
                                     std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("init_uniform: N must be positive");
    if (domain.planar() && n < 3)
      throw std::invalid_argument("init_uniform: planar domains need N >= 3");
    Rng rng(seed);
    Configuration config;
    config.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) config.points.push_back(draw_point(rng, domain));
    VoronoiProcess p(Tessellation::build(config, domain), spec, 0);
    p.rng_ = rng;
    return p;
  }

  const Tessellation& tessellation() const { return tess_; }
  const SelectionSpec& spec() const { return spec_; }
  const std::vector<double>& weights() const { return index_.weights(); }
  std::uint64_t step_count() const { return steps_; }
  std::uint64_t total_redraws() const { return redraws_; }
  const Rng& rng() const { return rng_; }

  /// P(J = j) = S(C_j) / sum_i S(C_i).
  std::vector<double> cull_distribution() const {
    const auto& w = index_.weights();
    double total = 0.0;
    for (double x : w) total += x;
    std::vector<double> p(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) p[i] = w[i] / total;
    return p;
  }

  /// Draws the index of the point to cull (consumes one uniform).
  std::size_t draw_cull() {
    for (;;) {
      const double u = rng_.uniform() * index_.total();
      const std::size_t j = index_.find(u);
      if (index_.weight(j) > 0.0) return j;
    }
  }

  StepRecord step() {
    StepRecord rec;
    const std::size_t j = draw_cull();
    rec.culled = j;
    rec.weight_share = index_.weight(j) / index_.total();
    std::optional<std::vector<std::size_t>> changed;
    for (;;) {
      const Vec2 p = draw_point(rng_, tess_.domain());
      changed = tess_.replace_point(j, p);
      if (changed) {
        rec.new_point = tess_.point(j);
        break;
      }
      ++rec.redraws;
    }
    for (const std::size_t i : *changed) index_.set(i, selection_weight(spec_, tess_.cell(i)));
    check_total();
    rec.step = ++steps_;
    redraws_ += rec.redraws;
    return rec;
  }

  /// True when the cached weights equal a from-scratch evaluation exactly.
  bool weights_coherent() const {
    for (std::size_t i = 0; i < tess_.size(); ++i)
      if (index_.weight(i) != selection_weight(spec_, tess_.cell(i))) return false;
    return true;
  }

  static Vec2 draw_point(Rng& rng, const Domain& domain) {
    const double x = rng.uniform();
    if (!domain.planar()) return {x, 0.0};
    const double y = rng.uniform();
    return {x, y};
  }

 private:
  void check_total() const {
    if (!(index_.total() > 0.0))
      throw std::domain_error("VoronoiProcess: all selection weights are zero");
  }

  Tessellation tess_;
  SelectionSpec spec_;
  Rng rng_;
  WeightIndex index_;
  std::uint64_t steps_ = 0;
  std::uint64_t redraws_ = 0;
};

/// A periodic read-only probe of the process state.
struct Observer {
  std::string name;
  std::uint64_t period = 1;
  std::function<std::vector<double>(const VoronoiProcess&)> observe;
};

struct Observation {
  std::uint64_t step = 0;
  std::string name;
  std::vector<double> values;
};

struct EvolveResult {
  std::vector<Observation> log;  // ordered by step, then observer order
  std::vector<StepRecord> steps;  // only when requested
  std::uint64_t steps_taken = 0;
  std::optional<std::string> error;  // observer failure; log holds the partial run
};

/// Applies `steps` steps, invoking each observer after every multiple of
/// its period.
inline EvolveResult evolve(VoronoiProcess& process, std::uint64_t steps,
                           const std::vector<Observer>& observers = {},
                           bool keep_step_records = false) {
  for (const Observer& o : observers)
    if (o.period == 0) throw std::invalid_argument("evolve: observer period must be positive");
  EvolveResult result;
  for (std::uint64_t s = 1; s <= steps; ++s) {
    StepRecord rec = process.step();
    if (keep_step_records) result.steps.push_back(rec);
    ++result.steps_taken;
    for (const Observer& o : observers) {
      if (s % o.period != 0) continue;
      try {
        result.log.push_back({s, o.name, o.observe(process)});
      } catch (const std::exception& e) {
        result.error = "observer '" + o.name + "' failed at step " + std::to_string(s) + ": " +
                       e.what();
        return result;
      }
    }
  }
  return result;
}

}  // namespace vpp::dynamics
