#pragma once

// Declarative experiment plans and their JSON form.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vpp/dynamics/selection.hpp"
#include "vpp/geometry/tessellation.hpp"

namespace vpp::harness {

using geometry::DomainKind;
using json = nlohmann::ordered_json;

enum class ProcessKind { v, n, aipp, csr };

inline std::string to_string(ProcessKind k) {
  switch (k) {
    case ProcessKind::v: return "v";
    case ProcessKind::n: return "n";
    case ProcessKind::aipp: return "aipp";
    case ProcessKind::csr: return "csr";
  }
  return "?";
}

inline ProcessKind parse_process(const std::string& s) {
  for (const ProcessKind k : {ProcessKind::v, ProcessKind::n, ProcessKind::aipp, ProcessKind::csr})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown process kind: " + s);
}

struct ExperimentPlan {
  ProcessKind process = ProcessKind::csr;
  double alpha = 0.0;                // v-process exponent
  std::string selection = "vanilla";  // n-process rule
  double gamma1 = 1.0;               // AIPP
  DomainKind domain = DomainKind::unit_square;
  std::size_t n_points = 2000;
  double steps_per_point = 12.0;  // T = steps_per_point * N
  std::size_t replicates = 25;
  std::uint64_t seed = 1;
  int depth_filter = 3;
  bool j_curve = true;
  int r_points = 64;
  std::vector<double> r_grid;  // explicit radii; empty = derived from a pilot pattern
  int reference_grid = 128;
  std::uint64_t observer_period = 0;  // R* trajectory period in steps; 0 = off
  bool keep_patterns = true;

  // AIPP
  double rho = 0.01;
  double gamma_exponent = 1e4;
  double beta = 0.0;  // 0 = tune to the target count (n_points)
  std::uint64_t burnin = 2'000'000;
  bool clipped = false;

  unsigned threads = 0;  // 0 = hardware concurrency; does not affect results

  std::uint64_t total_steps() const {
    return static_cast<std::uint64_t>(std::llround(steps_per_point * static_cast<double>(n_points)));
  }

  dynamics::SelectionSpec selection_spec() const {
    if (process == ProcessKind::v) return dynamics::VolumePower{alpha};
    if (process == ProcessKind::n) return dynamics::NeighbourNamed{dynamics::parse_rule(selection)};
    return dynamics::VolumePower{0.0};
  }

  std::string label() const {
    switch (process) {
      case ProcessKind::v: {
        char buf[64];
        std::snprintf(buf, sizeof buf, "v(alpha=%g)", alpha);
        return buf;
      }
      case ProcessKind::n: return "n(" + selection + ")";
      case ProcessKind::aipp: {
        char buf[64];
        std::snprintf(buf, sizeof buf, "aipp(gamma1=%g)", gamma1);
        return buf;
      }
      case ProcessKind::csr: return "csr";
    }
    return "?";
  }

  void validate() const {
    if (replicates < 1) throw std::invalid_argument("plan: replicates must be >= 1");
    if (!(steps_per_point >= 0.0)) throw std::invalid_argument("plan: steps_per_point must be >= 0");
    if (n_points < 1) throw std::invalid_argument("plan: n_points must be >= 1");
    if (domain != DomainKind::circle && n_points < 3)
      throw std::invalid_argument("plan: planar domains need n_points >= 3");
    if (process == ProcessKind::n) (void)dynamics::parse_rule(selection);
    if (process == ProcessKind::aipp && domain != DomainKind::unit_square)
      throw std::invalid_argument("plan: the area-interaction process lives on the unit square");
    if (process == ProcessKind::aipp && (!(rho > 0.0) || !(gamma1 > 0.0) || beta < 0.0))
      throw std::invalid_argument("plan: invalid area-interaction parameters");
    if (r_points < 2) throw std::invalid_argument("plan: r_points must be >= 2");
    if (reference_grid < 1) throw std::invalid_argument("plan: reference_grid must be positive");
    for (std::size_t i = 1; i < r_grid.size(); ++i)
      if (!(r_grid[i] > r_grid[i - 1])) throw std::invalid_argument("plan: r_grid must increase");
  }
};

inline json to_json(const ExperimentPlan& p) {
  json j;
  j["process"] = to_string(p.process);
  j["alpha"] = p.alpha;
  j["selection"] = p.selection;
  j["gamma1"] = p.gamma1;
  j["domain"] = std::string(geometry::to_string(p.domain));
  j["n_points"] = p.n_points;
  j["steps_per_point"] = p.steps_per_point;
  j["replicates"] = p.replicates;
  j["seed"] = p.seed;
  j["depth_filter"] = p.depth_filter;
  j["j_curve"] = p.j_curve;
  j["r_points"] = p.r_points;
  j["r_grid"] = p.r_grid;
  j["reference_grid"] = p.reference_grid;
  j["observer_period"] = p.observer_period;
  j["keep_patterns"] = p.keep_patterns;
  j["rho"] = p.rho;
  j["gamma_exponent"] = p.gamma_exponent;
  j["beta"] = p.beta;
  j["burnin"] = p.burnin;
  j["clipped"] = p.clipped;
  return j;
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline ExperimentPlan plan_from_json(const json& j) {
  ExperimentPlan p;
  static const char* known[] = {"process", "alpha", "selection", "gamma1", "domain", "n_points",
                                "steps_per_point", "replicates", "seed", "depth_filter",
                                "j_curve", "r_points", "r_grid", "reference_grid",
                                "observer_period", "keep_patterns", "rho", "gamma_exponent",
                                "beta", "burnin", "clipped", "threads"};
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw std::invalid_argument("plan: unknown key '" + key + "'");
  }
  try {
    if (j.contains("process")) p.process = parse_process(j["process"].get<std::string>());
    if (j.contains("domain")) p.domain = geometry::parse_domain_kind(j["domain"].get<std::string>());
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j[key].get<std::decay_t<decltype(field)>>();
    };
    get("alpha", p.alpha);
    get("selection", p.selection);
    get("gamma1", p.gamma1);
    get("n_points", p.n_points);
    get("steps_per_point", p.steps_per_point);
    get("replicates", p.replicates);
    get("seed", p.seed);
    get("depth_filter", p.depth_filter);
    get("j_curve", p.j_curve);
    get("r_points", p.r_points);
    get("r_grid", p.r_grid);
    get("reference_grid", p.reference_grid);
    get("observer_period", p.observer_period);
    get("keep_patterns", p.keep_patterns);
    get("rho", p.rho);
    get("gamma_exponent", p.gamma_exponent);
    get("beta", p.beta);
    get("burnin", p.burnin);
    get("clipped", p.clipped);
    get("threads", p.threads);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("plan: ") + e.what());
  }
  p.validate();
  return p;
}

inline ExperimentPlan read_plan_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open plan file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("plan file " + path + ": " + e.what());
  }
  return plan_from_json(j);
}

/// 64-bit FNV-1a hash of the canonical plan JSON, as 16 hex digits.
inline std::string fingerprint(const ExperimentPlan& p) {
  const std::string s = to_json(p).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace vpp::harness
