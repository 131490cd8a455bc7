#pragma once

// Test fixtures: random and perturbed-grid configurations, plus the
// brute-force cell oracles.

#include <cstddef>
#include <cstdint>
#include <random>

#include "vpp/geometry/tessellation.hpp"
#include "vpp/harness/brute_force.hpp"

namespace vpp::testing {

using brute_force::halfplane_cells;
using brute_force::monte_carlo_areas;
using brute_force::OracleCell;
using geometry::Configuration;

inline Configuration uniform_config(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Configuration c;
  for (std::size_t i = 0; i < n; ++i) c.points.push_back({u(rng), u(rng)});
  return c;
}

/// k x k grid with cell-centred points, each jittered by up to `jitter`
/// times the spacing.
inline Configuration perturbed_grid(std::size_t k, double jitter, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Configuration c;
  const double h = 1.0 / static_cast<double>(k);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t q = 0; q < k; ++q)
      c.points.push_back({(static_cast<double>(q) + 0.5 + jitter * u(rng)) * h,
                          (static_cast<double>(r) + 0.5 + jitter * u(rng)) * h});
  return c;
}

}  // namespace vpp::testing
