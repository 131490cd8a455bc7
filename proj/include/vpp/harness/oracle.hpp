#pragma once

// Named brute-force cross-checks of the engine, for use from the command
// line. A failing check carries the offending instance for replay.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vpp/aipp/coverage.hpp"
#include "vpp/dynamics/process.hpp"
#include "vpp/geometry/tessellation.hpp"
#include "vpp/harness/brute_force.hpp"
#include "vpp/random.hpp"
#include "vpp/stats/anova.hpp"

namespace vpp::harness {

using json = nlohmann::ordered_json;

struct OracleReport {
  std::string check;
  bool pass = false;
  double max_error = 0.0;
  double tolerance = 0.0;
  std::string detail;
  json instance;  // the worst case, when the check failed
};

inline std::vector<std::string> oracle_names() {
  return {"cell-areas", "adjacency", "incremental", "weights", "anova", "lens"};
}

namespace detail {

inline geometry::Configuration oracle_config(std::size_t n, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0, StreamRole::placement));
  geometry::Configuration c;
  for (std::size_t i = 0; i < n; ++i) c.points.push_back({rng.uniform(), rng.uniform()});
  return c;
}

inline json points_json(const geometry::Configuration& c) {
  json a = json::array();
  for (const auto& p : c.points) a.push_back({p.x, p.y});
  return a;
}

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

inline std::string set_string(const std::set<std::size_t>& s) {
  std::string out = "{";
  for (const std::size_t x : s) out += (out.size() > 1 ? "," : "") + std::to_string(x);
  return out + "}";
}

}  // namespace detail

inline OracleReport run_oracle(const std::string& name, std::size_t n, std::uint64_t seed) {
  using geometry::Domain;
  using geometry::DomainKind;
  using geometry::Tessellation;
  OracleReport rep;
  rep.check = name;

  if (name == "cell-areas") {
    rep.tolerance = 2e-3;
    const auto config = detail::oracle_config(n, seed);
    const auto tess = Tessellation::build(config, Domain{DomainKind::unit_square});
    const auto mc = brute_force::monte_carlo_areas(config, DomainKind::unit_square, 1'000'000,
                                                   derive_seed(seed, 1, StreamRole::statistics));
    const auto hp = brute_force::halfplane_cells(config, DomainKind::unit_square);
    std::size_t worst = 0;
    double exact_err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = std::abs(tess.cell(i).area - mc[i]);
      if (e > rep.max_error) {
        rep.max_error = e;
        worst = i;
      }
      exact_err = std::max(exact_err, std::abs(tess.cell(i).area - hp[i].area));
    }
    rep.pass = rep.max_error <= rep.tolerance && exact_err <= 1e-9;
    rep.detail = "max |area - monte carlo| = " + detail::num(rep.max_error) +
                 ", max |area - half-plane| = " + detail::num(exact_err);
    if (!rep.pass) rep.instance = {{"points", detail::points_json(config)}, {"worst_cell", worst}};
    return rep;
  }

  if (name == "adjacency") {
    rep.tolerance = 0.0;
    for (const DomainKind kind : {DomainKind::unit_square, DomainKind::torus}) {
      const auto config = detail::oracle_config(n, seed);
      const auto tess = Tessellation::build(config, Domain{kind});
      const auto hp = brute_force::halfplane_cells(config, kind);
      for (std::size_t i = 0; i < n; ++i) {
        const auto& nb = tess.cell(i).neighbor_ids;
        const std::set<std::size_t> got(nb.begin(), nb.end());
        if (got != hp[i].neighbors) {
          rep.max_error += 1.0;
          if (rep.instance.is_null())
            rep.instance = {{"domain", std::string(geometry::to_string(kind))},
                            {"points", detail::points_json(config)},
                            {"cell", i},
                            {"engine", detail::set_string(got)},
                            {"oracle", detail::set_string(hp[i].neighbors)}};
        }
      }
    }
    rep.pass = rep.max_error == 0.0;
    rep.detail = std::to_string(static_cast<long>(rep.max_error)) +
                 " cells with differing neighbour sets (square and torus)";
    return rep;
  }

  if (name == "incremental") {
    rep.tolerance = 1e-12;
    auto config = detail::oracle_config(n, seed);
    auto tess = Tessellation::build(config, Domain{DomainKind::unit_square});
    tess.set_rebuild_period(0);
    Rng rng(derive_seed(seed, 2, StreamRole::placement));
    const std::size_t replacements = 10 * n;
    for (std::size_t s = 0; s < replacements; ++s)
      (void)tess.replace_point(rng.below(n), {rng.uniform(), rng.uniform()});
    const auto fresh = Tessellation::build(tess.configuration(), Domain{DomainKind::unit_square});
    bool same_adjacency = true;
    for (std::size_t i = 0; i < n; ++i) {
      rep.max_error = std::max(rep.max_error, std::abs(tess.cell(i).area - fresh.cell(i).area));
      same_adjacency = same_adjacency && tess.cell(i).neighbor_ids == fresh.cell(i).neighbor_ids;
    }
    rep.pass = same_adjacency && rep.max_error <= rep.tolerance;
    rep.detail = std::to_string(replacements) + " replacements; adjacency " +
                 (same_adjacency ? "identical" : "differs") + ", max area difference " +
                 detail::num(rep.max_error);
    if (!rep.pass) rep.instance = {{"points", detail::points_json(tess.configuration())}};
    return rep;
  }

  if (name == "weights") {
    rep.tolerance = 0.0;
    const std::vector<dynamics::SelectionSpec> specs = {
        dynamics::VolumePower{0.5}, dynamics::VolumePower{-2.0},
        dynamics::NeighbourNamed{dynamics::NeighbourRule::anti_few},
        dynamics::NeighbourNamed{dynamics::NeighbourRule::pro_5}};
    for (const auto& spec : specs) {
      auto p = dynamics::VoronoiProcess::init_uniform(n, Domain{DomainKind::unit_square}, spec, seed);
      dynamics::evolve(p, 20 * n);
      for (std::size_t i = 0; i < n; ++i) {
        const double w = dynamics::selection_weight(spec, p.tessellation().cell(i));
        const double e = std::abs(p.weights()[i] - w);
        if (e > rep.max_error) {
          rep.max_error = e;
          rep.instance = {{"selection", dynamics::describe(spec)},
                          {"points", detail::points_json(p.tessellation().configuration())},
                          {"cell", i}};
        }
      }
    }
    rep.pass = rep.max_error == 0.0;
    if (rep.pass) rep.instance = nullptr;
    rep.detail = "cached weights vs recomputation after 20N steps, max difference " +
                 detail::num(rep.max_error);
    return rep;
  }

  if (name == "anova") {
    rep.tolerance = 1e-12;
    const std::vector<std::vector<std::vector<double>>> cells = {
        {{2.0, 4.0, 3.0}, {6.0, 8.0, 7.5}, {1.0, 0.5, 2.0}},
        {{3.0, 5.0, 4.5}, {11.0, 13.0, 12.0}, {2.5, 3.5, 3.0}}};
    const auto t = stats::two_way_anova(cells);
    // Direct sums over observations.
    double grand = 0.0, count = 0.0;
    for (const auto& row : cells)
      for (const auto& c : row)
        for (const double y : c) {
          grand += y;
          count += 1.0;
        }
    grand /= count;
    double ss_a = 0.0, ss_b = 0.0, ss_e = 0.0, ss_t = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      double ma = 0.0, na = 0.0;
      for (const auto& c : cells[i])
        for (const double y : c) {
          ma += y;
          na += 1.0;
        }
      ma /= na;
      for (std::size_t j = 0; j < cells[i].size(); ++j) {
        double mb = 0.0, nb = 0.0;
        for (const auto& row : cells)
          for (const double y : row[j]) {
            mb += y;
            nb += 1.0;
          }
        mb /= nb;
        double mc = 0.0;
        for (const double y : cells[i][j]) mc += y / static_cast<double>(cells[i][j].size());
        for (const double y : cells[i][j]) {
          ss_a += (ma - grand) * (ma - grand) / static_cast<double>(cells[i].size());
          ss_e += (y - mc) * (y - mc);
          ss_t += (y - grand) * (y - grand);
          (void)mb;
        }
      }
    }
    for (std::size_t j = 0; j < cells[0].size(); ++j) {
      double mb = 0.0, nb = 0.0;
      for (const auto& row : cells)
        for (const double y : row[j]) {
          mb += y;
          nb += 1.0;
        }
      mb /= nb;
      ss_b += nb * (mb - grand) * (mb - grand);
    }
    ss_a *= static_cast<double>(cells[0].size());
    const double ss_ab = ss_t - ss_a - ss_b - ss_e;
    const double errs[] = {t.a.ss - ss_a, t.b.ss - ss_b, t.ab.ss - ss_ab, t.error.ss - ss_e,
                           t.ss_total - ss_t};
    for (const double e : errs) rep.max_error = std::max(rep.max_error, std::abs(e) / std::max(1.0, ss_t));
    rep.pass = rep.max_error <= rep.tolerance;
    rep.detail = "relative sum-of-squares mismatch " + detail::num(rep.max_error);
    return rep;
  }

  if (name == "lens") {
    rep.tolerance = 1e-12;
    const double rho = 0.01;
    const int samples = static_cast<int>(std::max<std::size_t>(n, 2));
    for (int k = 0; k <= samples; ++k) {
      const double d = 2.0 * rho * k / samples;
      const double lens = 2.0 * rho * rho * std::acos(d / (2.0 * rho)) -
                          0.5 * d * std::sqrt(std::max(0.0, 4.0 * rho * rho - d * d));
      const double expect = 2.0 * std::numbers::pi * rho * rho - lens;
      const double got = aipp::union_area({{0.5, 0.5}, {0.5 + d, 0.5}}, rho);
      const double e = std::abs(got - expect) / (std::numbers::pi * rho * rho);
      if (e > rep.max_error) {
        rep.max_error = e;
        rep.instance = {{"distance", d}, {"engine", got}, {"formula", expect}};
      }
    }
    rep.pass = rep.max_error <= rep.tolerance;
    if (rep.pass) rep.instance = nullptr;
    rep.detail = "two-disk union vs lens formula, relative error " + detail::num(rep.max_error);
    return rep;
  }

  throw std::invalid_argument("unknown oracle check: " + name);
}

inline json report_json(const OracleReport& r) {
  json j;
  j["check"] = r.check;
  j["pass"] = r.pass;
  j["max_error"] = r.max_error;
  j["tolerance"] = r.tolerance;
  j["detail"] = r.detail;
  if (!r.instance.is_null()) j["instance"] = r.instance;
  return j;
}

}  // namespace vpp::harness
