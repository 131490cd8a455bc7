#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

namespace vpp::stats {

/// Thiel's redundancy R* = ln N + sum p_j ln p_j with p_j = a_j / sum a.
/// Zero iff all areas are equal; strictly below ln N.
inline double thiel_redundancy(std::span<const double> areas) {
  if (areas.empty()) throw std::invalid_argument("thiel_redundancy: no cells");
  double total = 0.0;
  for (std::size_t i = 0; i < areas.size(); ++i) {
    if (!(areas[i] > 0.0))
      throw std::invalid_argument("thiel_redundancy: non-positive area at index " +
                                  std::to_string(i));
    total += areas[i];
  }
  double s = 0.0;
  for (const double a : areas) {
    const double p = a / total;
    s += p * std::log(p);
  }
  const double r = std::log(static_cast<double>(areas.size())) + s;
  return r > 0.0 ? r : 0.0;
}

}  // namespace vpp::stats
