#pragma once

// Cell-level statistics: neighbour-count EPMF, NN-depth filtering and
// redundancy over a subset of cells.

#include <cstddef>
#include <map>
#include <stdexcept>
#include <vector>

#include "vpp/geometry/analysis.hpp"
#include "vpp/geometry/tessellation.hpp"
#include "vpp/stats/redundancy.hpp"

namespace vpp::stats {

using geometry::Tessellation;

/// Relative frequency of each neighbour count.
struct Epmf {
  std::map<std::size_t, double> freq;

  double mean() const {
    double m = 0.0;
    for (const auto& [n, f] : freq) m += static_cast<double>(n) * f;
    return m;
  }
  double mass_above(std::size_t n) const {
    double s = 0.0;
    for (auto it = freq.upper_bound(n); it != freq.end(); ++it) s += it->second;
    return s;
  }
};

inline Epmf nn_epmf(const Tessellation& tess, const std::vector<std::size_t>& included_ids) {
  if (included_ids.empty()) throw std::invalid_argument("nn_epmf: empty inclusion set");
  std::map<std::size_t, std::size_t> counts;
  for (const std::size_t id : included_ids) ++counts[tess.cell(id).neighbor_ids.size()];
  Epmf e;
  const double n = static_cast<double>(included_ids.size());
  for (const auto& [k, c] : counts) e.freq[k] = static_cast<double>(c) / n;
  return e;
}

/// Ids of cells with NN-depth >= m (square domain only), ascending.
inline std::vector<std::size_t> depth_filter(const Tessellation& tess, int m) {
  const auto depth = geometry::nn_depths(tess);
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < depth.size(); ++i)
    if (depth[i] >= m) ids.push_back(i);
  return ids;
}

inline std::vector<std::size_t> all_ids(const Tessellation& tess) {
  std::vector<std::size_t> ids(tess.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  return ids;
}

/// Default inclusion set: depth >= m on the square, every cell elsewhere.
inline std::vector<std::size_t> default_inclusion(const Tessellation& tess, int m = 3) {
  return tess.domain().has_boundary() ? depth_filter(tess, m) : all_ids(tess);
}

/// R* over the given cells, with probabilities renormalised over them.
inline double redundancy_of(const Tessellation& tess, const std::vector<std::size_t>& ids) {
  std::vector<double> areas;
  areas.reserve(ids.size());
  for (const std::size_t id : ids) areas.push_back(tess.cell(id).area);
  return thiel_redundancy(areas);
}

}  // namespace vpp::stats
