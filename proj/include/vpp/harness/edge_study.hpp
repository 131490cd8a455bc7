#pragma once

// Two-way ANOVA of per-cell redundancy contributions against selection
// rule and NN-depth class.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "vpp/geometry/analysis.hpp"
#include "vpp/harness/run.hpp"
#include "vpp/stats/anova.hpp"

namespace vpp::harness {

inline constexpr double kSignificance = 0.05;

/// "csr", "v:<alpha>", "n:<rule>" or "aipp:<gamma1>".
inline void apply_selection(ExperimentPlan& plan, const std::string& label) {
  const auto colon = label.find(':');
  const std::string kind = label.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : label.substr(colon + 1);
  plan.process = parse_process(kind);
  try {
    if (plan.process == ProcessKind::v) plan.alpha = std::stod(arg);
    if (plan.process == ProcessKind::aipp) plan.gamma1 = std::stod(arg);
  } catch (const std::logic_error&) {
    throw std::invalid_argument("edge-study: bad selection '" + label + "'");
  }
  if (plan.process == ProcessKind::n) {
    (void)dynamics::parse_rule(arg);
    plan.selection = arg;
  }
}

struct EdgeStudy {
  std::vector<std::string> selections;
  std::vector<std::string> classes;
  std::vector<std::vector<std::vector<double>>> responses;  // [selection][class][replicate]
  stats::AnovaTable table;
  std::optional<stats::AnovaTable> interior;  // without the boundary class
  bool depth_significant = false;
  bool selection_significant = false;
  bool interaction_significant = false;
  std::optional<bool> interior_depth_significant;
};

/// Depth class of a cell: depths 1 .. top-1 stand alone, deeper cells share
/// the last class.
inline std::size_t depth_class(int depth, int top) { return static_cast<std::size_t>(std::min(depth, top) - 1); }

/// Mean of (a/abar) ln(a/abar) over the cells of each depth class, abar = 1/N.
inline std::vector<double> class_contributions(const Tessellation& tess, int top) {
  const auto depth = geometry::nn_depths(tess);
  const double n = static_cast<double>(tess.size());
  std::vector<double> sum(static_cast<std::size_t>(top), 0.0), count(sum.size(), 0.0);
  for (std::size_t i = 0; i < tess.size(); ++i) {
    const double q = tess.cell(i).area * n;
    const std::size_t k = depth_class(depth[i], top);
    sum[k] += q > 0.0 ? q * std::log(q) : 0.0;
    count[k] += 1.0;
  }
  for (std::size_t k = 0; k < sum.size(); ++k) {
    if (count[k] == 0.0)
      throw std::runtime_error("edge-study: depth class " + std::to_string(k + 1) +
                               " is empty in a replicate; reduce the number of classes or raise N");
    sum[k] /= count[k];
  }
  return sum;
}

inline EdgeStudy edge_study(const ExperimentPlan& base, const std::vector<std::string>& selections,
                            int depth_classes = 4) {
  if (selections.size() < 2) throw std::invalid_argument("edge-study: needs at least 2 selections");
  if (depth_classes < 2) throw std::invalid_argument("edge-study: needs at least 2 depth classes");
  if (base.domain != DomainKind::unit_square)
    throw std::invalid_argument("edge-study: depth classes need the unit square");
  if (base.replicates < 2) throw std::invalid_argument("edge-study: needs at least 2 replicates");

  EdgeStudy out;
  out.selections = selections;
  for (int k = 1; k <= depth_classes; ++k)
    out.classes.push_back(k < depth_classes ? std::to_string(k) : ">=" + std::to_string(k));

  for (const std::string& label : selections) {
    ExperimentPlan plan = base;
    apply_selection(plan, label);
    plan.j_curve = false;
    plan.keep_patterns = true;
    plan.observer_period = 0;
    const ResultRecord rec = run(plan);
    if (rec.failures > 0) throw std::runtime_error("edge-study: replicate failed for " + label);
    std::vector<std::vector<double>> cls(static_cast<std::size_t>(depth_classes));
    for (const ReplicateResult& r : rec.replicates) {
      const auto tess = Tessellation::build(r.pattern, geometry::Domain{DomainKind::unit_square});
      const auto c = class_contributions(tess, depth_classes);
      for (std::size_t k = 0; k < c.size(); ++k) cls[k].push_back(c[k]);
    }
    out.responses.push_back(std::move(cls));
  }

  out.table = stats::two_way_anova(out.responses, "selection", "depth");
  out.selection_significant = out.table.a.p < kSignificance;
  out.depth_significant = out.table.b.p < kSignificance;
  out.interaction_significant = out.table.ab.p < kSignificance;
  if (depth_classes >= 3) {
    auto inner = out.responses;
    for (auto& row : inner) row.erase(row.begin());
    out.interior = stats::two_way_anova(inner, "selection", "depth");
    out.interior_depth_significant = out.interior->b.p < kSignificance;
  }
  return out;
}

inline json anova_json(const stats::AnovaTable& t) {
  json j;
  auto effect = [](const stats::AnovaEffect& e) {
    json x{{"name", e.name}, {"ss", e.ss}, {"df", e.df}, {"ms", e.ms}};
    if (std::isfinite(e.F)) x["F"] = e.F;
    if (std::isfinite(e.p)) x["p"] = e.p;
    return x;
  };
  j["effects"] = json::array({effect(t.a), effect(t.b), effect(t.ab), effect(t.error)});
  j["ss_total"] = t.ss_total;
  j["replicates"] = t.replicates;
  return j;
}

inline json edge_study_json(const EdgeStudy& s) {
  json j;
  j["selections"] = s.selections;
  j["depth_classes"] = s.classes;
  json means = json::array();
  for (const auto& row : s.responses) {
    json r = json::array();
    for (const auto& c : row) r.push_back(aggregate(c).mean);
    means.push_back(r);
  }
  j["cell_means"] = means;
  j["anova"] = anova_json(s.table);
  j["significant"] = {{"selection", s.selection_significant},
                      {"depth", s.depth_significant},
                      {"interaction", s.interaction_significant}};
  if (s.interior) {
    j["anova_without_boundary"] = anova_json(*s.interior);
    j["significant"]["depth_without_boundary"] = *s.interior_depth_significant;
  }
  return j;
}

}  // namespace vpp::harness
