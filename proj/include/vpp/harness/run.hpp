#pragma once

// Replicated experiment runs: seeded replicates on a worker pool, per-run
// statistics, aggregation and file output.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "vpp/aipp/sampler.hpp"
#include "vpp/dynamics/process.hpp"
#include "vpp/geometry/point_io.hpp"
#include "vpp/geometry/tessellation.hpp"
#include "vpp/harness/plan.hpp"
#include "vpp/random.hpp"
#include "vpp/stats/cells.hpp"
#include "vpp/stats/curves.hpp"
#include "vpp/stats/gamma.hpp"
#include "vpp/version.hpp"

namespace vpp::harness {

using geometry::Configuration;
using geometry::Domain;
using geometry::Tessellation;

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Aggregate {
  std::size_t count = 0;
  double mean = kNaN;
  double sd = kNaN;  // sample standard deviation; 0 for a single value
  double se = kNaN;  // sd / sqrt(count)
};

/// Order-independent: values are summed in sorted order.
inline Aggregate aggregate(std::vector<double> xs) {
  Aggregate a;
  a.count = xs.size();
  if (xs.empty()) return a;
  std::sort(xs.begin(), xs.end());
  double s = 0.0;
  for (const double x : xs) s += x;
  a.mean = s / static_cast<double>(xs.size());
  double ss = 0.0;
  for (const double x : xs) ss += (x - a.mean) * (x - a.mean);
  a.sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
  a.se = a.sd / std::sqrt(static_cast<double>(xs.size()));
  return a;
}

struct ReplicateResult {
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::size_t n_points = 0;
  std::size_t included = 0;
  double r_star = kNaN;
  stats::Epmf epmf;
  std::vector<double> areas;  // included cells
  std::vector<double> trajectory;  // R* at each observer step
  std::uint64_t redraws = 0;
  std::optional<std::string> warning;
  Configuration pattern;
  std::vector<std::size_t> included_ids;
  std::optional<stats::CurveData> curve;
};

struct ResultRecord {
  std::string fingerprint;
  std::string version = kVersion;
  ExperimentPlan plan;
  std::vector<ReplicateResult> replicates;
  Aggregate r_star;
  std::size_t failures = 0;
  stats::Epmf epmf;  // pooled over the included cells of every successful replicate
  std::optional<double> gamma_shape;
  std::optional<std::string> gamma_error;
  std::optional<stats::CurveData> j_curve;
  std::optional<stats::RegressionFit> j_smooth;
  std::optional<double> aipp_beta;
  std::optional<double> aipp_tuned_mean;
};

/// Called with every step of replicate 0 (from its worker thread).
using StepCallback = std::function<void(const dynamics::StepRecord&)>;

inline StreamRole stream_role(ProcessKind k) {
  switch (k) {
    case ProcessKind::csr: return StreamRole::placement;
    case ProcessKind::aipp: return StreamRole::aipp;
    default: return StreamRole::dynamics;
  }
}

/// Cells entering every statistic: NN-depth >= m on the square, all elsewhere.
inline std::vector<std::size_t> inclusion(const Tessellation& tess, int depth_filter) {
  if (tess.domain().has_boundary() && depth_filter > 1) return stats::depth_filter(tess, depth_filter);
  return stats::all_ids(tess);
}

inline aipp::AippParams aipp_params(const ExperimentPlan& plan) {
  aipp::AippParams p;
  p.beta = plan.beta > 0.0 ? plan.beta : static_cast<double>(plan.n_points);
  p.gamma1 = plan.gamma1;
  p.gamma_exponent = plan.gamma_exponent;
  p.rho = plan.rho;
  p.target_count = static_cast<double>(plan.n_points);
  p.clipped = plan.clipped;
  return p;
}

namespace detail {

struct AippSetup {
  aipp::AippParams params;
  std::vector<geometry::Vec2> start;
};

inline void summarise(ReplicateResult& r, const Tessellation& tess, int depth_filter) {
  r.n_points = tess.size();
  r.included_ids = inclusion(tess, depth_filter);
  r.included = r.included_ids.size();
  if (r.included_ids.empty()) throw std::runtime_error("no cells pass the depth filter");
  r.r_star = stats::redundancy_of(tess, r.included_ids);
  r.epmf = stats::nn_epmf(tess, r.included_ids);
  r.areas.clear();
  for (const std::size_t id : r.included_ids) r.areas.push_back(tess.cell(id).area);
}

inline ReplicateResult run_replicate(const ExperimentPlan& plan, std::size_t rep,
                                     const AippSetup* aipp_setup, const StepCallback& on_step) {
  ReplicateResult r;
  r.replicate = rep;
  r.seed = derive_seed(plan.seed, rep, stream_role(plan.process));
  const Domain domain{plan.domain};
  try {
    switch (plan.process) {
      case ProcessKind::csr: {
        Rng rng(r.seed);
        Configuration c;
        for (std::size_t i = 0; i < plan.n_points; ++i)
          c.points.push_back(dynamics::VoronoiProcess::draw_point(rng, domain));
        const Tessellation tess = Tessellation::build(c, domain);
        summarise(r, tess, plan.depth_filter);
        r.pattern = std::move(c);
        break;
      }
      case ProcessKind::v:
      case ProcessKind::n: {
        auto proc = dynamics::VoronoiProcess::init_uniform(plan.n_points, domain,
                                                           plan.selection_spec(), r.seed);
        const std::uint64_t steps = plan.total_steps();
        for (std::uint64_t s = 1; s <= steps; ++s) {
          const auto rec = proc.step();
          if (on_step && rep == 0) on_step(rec);
          if (plan.observer_period && s % plan.observer_period == 0) {
            const auto ids = inclusion(proc.tessellation(), plan.depth_filter);
            r.trajectory.push_back(stats::redundancy_of(proc.tessellation(), ids));
          }
        }
        r.redraws = proc.total_redraws();
        summarise(r, proc.tessellation(), plan.depth_filter);
        r.pattern = proc.tessellation().configuration();
        break;
      }
      case ProcessKind::aipp: {
        auto s = aipp::sample(aipp_setup->params, plan.burnin, r.seed, aipp_setup->start);
        r.warning = s.diagnostics.warning;
        Configuration c{std::move(s.points)};
        const Tessellation tess = Tessellation::build(c, domain);
        summarise(r, tess, plan.depth_filter);
        r.pattern = std::move(c);
        break;
      }
    }
    r.ok = true;
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
  }
  return r;
}

inline unsigned worker_count(unsigned requested, std::size_t jobs) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(1, jobs)));
}

/// Runs f(i) for i in [0, jobs) on a pool of workers.
inline void parallel_for(std::size_t jobs, unsigned threads, const std::function<void(std::size_t)>& f) {
  const unsigned n = worker_count(threads, jobs);
  if (n <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs; i = next++) f(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace detail

/// Radii for J curves: the plan's explicit grid, or the default grid of the
/// given pilot pattern.
inline std::vector<double> resolve_r_grid(const ExperimentPlan& plan, const Configuration& pilot) {
  if (!plan.r_grid.empty()) return plan.r_grid;
  return stats::default_r_grid(pilot.points, Domain{plan.domain}, plan.r_points, plan.reference_grid);
}

inline ResultRecord run(const ExperimentPlan& plan, const StepCallback& on_step = {}) {
  plan.validate();
  ResultRecord rec;
  rec.plan = plan;
  rec.fingerprint = fingerprint(plan);

  std::optional<detail::AippSetup> setup;
  if (plan.process == ProcessKind::aipp) {
    setup.emplace();
    setup->params = aipp_params(plan);
    if (plan.beta > 0.0) {
      rec.aipp_beta = plan.beta;
    } else {
      const auto tuned = aipp::tune_beta(setup->params, derive_seed(plan.seed, 0, StreamRole::tuning));
      setup->params.beta = tuned.beta;
      setup->start = tuned.state;
      rec.aipp_beta = tuned.beta;
      rec.aipp_tuned_mean = tuned.mean_count;
    }
  }

  rec.replicates.resize(plan.replicates);
  detail::parallel_for(plan.replicates, plan.threads, [&](std::size_t i) {
    rec.replicates[i] = detail::run_replicate(plan, i, setup ? &*setup : nullptr, on_step);
  });

  std::vector<double> rs, pooled_areas;
  std::map<std::size_t, double> counts;
  double included = 0.0;
  for (const auto& r : rec.replicates) {
    if (!r.ok) {
      ++rec.failures;
      continue;
    }
    rs.push_back(r.r_star);
    for (const auto& [n, f] : r.epmf.freq) counts[n] += f * static_cast<double>(r.included);
    included += static_cast<double>(r.included);
    // Areas relative to the replicate mean, so pooling is scale-free.
    const double mean_area = 1.0 / static_cast<double>(r.n_points);
    for (const double a : r.areas) pooled_areas.push_back(a / mean_area);
  }
  rec.r_star = aggregate(rs);
  for (const auto& [n, c] : counts) rec.epmf.freq[n] = c / included;
  if (pooled_areas.size() >= 2) {
    try {
      rec.gamma_shape = stats::gamma_shape_mle(pooled_areas);
    } catch (const std::exception& e) {
      rec.gamma_error = e.what();
    }
  }

  const bool planar = Domain{plan.domain}.planar();
  if (plan.j_curve && planar && !rs.empty()) {
    const auto first = std::find_if(rec.replicates.begin(), rec.replicates.end(),
                                    [](const ReplicateResult& r) { return r.ok; });
    const auto r_grid = resolve_r_grid(plan, first->pattern);
    detail::parallel_for(rec.replicates.size(), plan.threads, [&](std::size_t i) {
      auto& r = rec.replicates[i];
      if (!r.ok) return;
      try {
        r.curve = stats::estimate_curve(r.pattern.points, r_grid, Domain{plan.domain},
                                        r.included_ids, plan.reference_grid);
      } catch (const std::exception& e) {
        r.warning = std::string("J curve unavailable: ") + e.what();
      }
    });
    std::vector<stats::CurveData> curves;
    for (const auto& r : rec.replicates)
      if (r.curve) curves.push_back(*r.curve);
    if (!curves.empty()) {
      rec.j_curve = stats::average_curves(curves);
      try {
        rec.j_smooth = stats::smooth_lnJ(*rec.j_curve);
      } catch (const std::exception&) {
      }
    }
  }
  for (auto& r : rec.replicates) {
    r.included_ids.clear();
    r.included_ids.shrink_to_fit();
    if (!plan.keep_patterns) r.pattern.points.clear();
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Output

inline json epmf_json(const stats::Epmf& e) {
  json j = json::object();
  for (const auto& [n, f] : e.freq) j[std::to_string(n)] = f;
  return j;
}

inline json aggregate_json(const Aggregate& a) {
  json j;
  j["count"] = a.count;
  j["mean"] = a.mean;
  j["sd"] = a.sd;
  j["se"] = a.se;
  return j;
}

inline json curve_json(const stats::CurveData& c) {
  json j;
  j["r"] = c.r;
  j["F"] = c.F;
  j["G"] = c.G;
  json J = json::array(), lnJ = json::array();
  for (std::size_t k = 0; k < c.r.size(); ++k) {
    J.push_back(c.mask[k] ? json(c.J[k]) : json(nullptr));
    lnJ.push_back(c.mask[k] ? json(c.lnJ[k]) : json(nullptr));
  }
  j["J"] = J;
  j["lnJ"] = lnJ;
  j["sd_J"] = c.sd_J;
  j["sd_lnJ"] = c.sd_lnJ;
  j["n_draws"] = c.draws;
  return j;
}

/// Choices that shape the numbers, recorded with every output.
inline json method_metadata(const ExperimentPlan& plan) {
  json m;
  m["inclusion"] = Domain{plan.domain}.has_boundary() && plan.depth_filter > 1
                       ? "nn_depth >= " + std::to_string(plan.depth_filter)
                       : std::string("all cells");
  m["border_correction"] = plan.domain == DomainKind::torus ? "none (periodic)"
                                                            : "minus-sampling by the largest radius";
  m["lnJ_smoothing"] = "weighted cubic fit of ln(mean J), weights 1/sd(ln J) (delta method)";
  m["reference_grid"] = plan.reference_grid;
  m["initial_law"] = "iid uniform";
  if (plan.process == ProcessKind::aipp)
    m["coverage"] = plan.clipped ? "disk union clipped to the unit square" : "disk union in the plane";
  return m;
}

inline json record_json(const ResultRecord& rec) {
  json j;
  j["version"] = rec.version;
  j["fingerprint"] = rec.fingerprint;
  j["label"] = rec.plan.label();
  j["plan"] = to_json(rec.plan);
  j["method"] = method_metadata(rec.plan);
  j["r_star"] = aggregate_json(rec.r_star);
  j["failures"] = rec.failures;
  j["epmf"] = epmf_json(rec.epmf);
  j["gamma_shape"] = rec.gamma_shape ? json(*rec.gamma_shape) : json(nullptr);
  if (rec.gamma_error) j["gamma_error"] = *rec.gamma_error;
  if (rec.aipp_beta) j["aipp_beta"] = *rec.aipp_beta;
  if (rec.aipp_tuned_mean) j["aipp_tuned_mean"] = *rec.aipp_tuned_mean;
  if (rec.j_curve) j["j_curve"] = curve_json(*rec.j_curve);
  if (rec.j_smooth) j["j_smooth_coefficients"] = rec.j_smooth->coefficients;
  json reps = json::array();
  for (const auto& r : rec.replicates) {
    json x;
    x["replicate"] = r.replicate;
    x["seed"] = r.seed;
    x["ok"] = r.ok;
    if (!r.ok) x["error"] = r.error;
    x["n_points"] = r.n_points;
    x["included"] = r.included;
    x["r_star"] = r.ok ? json(r.r_star) : json(nullptr);
    x["epmf"] = epmf_json(r.epmf);
    if (!r.trajectory.empty()) x["trajectory"] = r.trajectory;
    x["redraws"] = r.redraws;
    if (r.warning) x["warning"] = *r.warning;
    reps.push_back(x);
  }
  j["replicates"] = reps;
  return j;
}

/// Writes `content` to `path` via a temporary file and a rename.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

inline std::string csv_number(double x) {
  if (std::isnan(x)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string provenance_header(const ResultRecord& rec) {
  return "# vpp " + rec.version + " plan " + rec.fingerprint + " seed " +
         std::to_string(rec.plan.seed) + " process " + rec.plan.label() + "\n";
}

inline std::string curve_csv(const ResultRecord& rec) {
  std::ostringstream os;
  os << provenance_header(rec);
  os << "r,F,G,J,lnJ,sd_J,sd_lnJ,n_draws,smoothed_lnJ\n";
  const auto& c = *rec.j_curve;
  for (std::size_t k = 0; k < c.r.size(); ++k) {
    os << csv_number(c.r[k]) << ',' << csv_number(c.F[k]) << ',' << csv_number(c.G[k]) << ','
       << (c.mask[k] ? csv_number(c.J[k]) : "") << ',' << (c.mask[k] ? csv_number(c.lnJ[k]) : "")
       << ',' << csv_number(c.sd_J[k]) << ',' << csv_number(c.sd_lnJ[k]) << ',' << c.draws << ','
       << (c.mask[k] && rec.j_smooth ? csv_number((*rec.j_smooth)(c.r[k])) : "") << '\n';
  }
  return os.str();
}

/// Writes the run's artifacts into `dir`: manifest.json always, then either
/// results.json or CSV tables, plus one pattern file per replicate.
inline void write_outputs(const ResultRecord& rec, const std::filesystem::path& dir,
                          const std::string& format = "csv") {
  if (format != "csv" && format != "json") throw std::invalid_argument("unknown format: " + format);
  json manifest;
  manifest["version"] = rec.version;
  manifest["fingerprint"] = rec.fingerprint;
  manifest["plan"] = to_json(rec.plan);
  manifest["method"] = method_metadata(rec.plan);
  manifest["seed"] = rec.plan.seed;
  atomic_write(dir / "manifest.json", manifest.dump(2) + "\n");

  if (format == "json") {
    atomic_write(dir / "results.json", record_json(rec).dump(2) + "\n");
  } else {
    std::ostringstream s;
    s << provenance_header(rec) << "label,count,mean_r_star,sd,se,failures,gamma_shape\n";
    s << rec.plan.label() << ',' << rec.r_star.count << ',' << csv_number(rec.r_star.mean) << ','
      << csv_number(rec.r_star.sd) << ',' << csv_number(rec.r_star.se) << ',' << rec.failures << ','
      << (rec.gamma_shape ? csv_number(*rec.gamma_shape) : "") << '\n';
    atomic_write(dir / "summary.csv", s.str());

    std::ostringstream r;
    r << provenance_header(rec) << "replicate,seed,ok,n_points,included,r_star,redraws,error\n";
    for (const auto& x : rec.replicates)
      r << x.replicate << ',' << x.seed << ',' << (x.ok ? 1 : 0) << ',' << x.n_points << ','
        << x.included << ',' << csv_number(x.ok ? x.r_star : kNaN) << ',' << x.redraws << ','
        << '"' << x.error << '"' << '\n';
    atomic_write(dir / "replicates.csv", r.str());

    std::ostringstream e;
    e << provenance_header(rec) << "neighbours,frequency\n";
    for (const auto& [n, f] : rec.epmf.freq) e << n << ',' << csv_number(f) << '\n';
    atomic_write(dir / "epmf.csv", e.str());
    atomic_write(dir / "epmf.json", epmf_json(rec.epmf).dump(2) + "\n");

    if (rec.j_curve) atomic_write(dir / "jcurve.csv", curve_csv(rec));
  }

  const int dim = Domain{rec.plan.domain}.planar() ? 2 : 1;
  for (const auto& x : rec.replicates) {
    if (!x.ok || x.pattern.points.empty()) continue;
    std::ostringstream os;
    geometry::write_points(os, x.pattern, dim,
                           {"vpp " + rec.version + " plan " + rec.fingerprint,
                            "process " + rec.plan.label() + " domain " +
                                std::string(geometry::to_string(rec.plan.domain)),
                            "replicate " + std::to_string(x.replicate) + " seed " +
                                std::to_string(x.seed)});
    char name[64];
    std::snprintf(name, sizeof name, "replicate_%03zu.txt", x.replicate);
    atomic_write(dir / "patterns" / name, os.str());
  }
}

}  // namespace vpp::harness
