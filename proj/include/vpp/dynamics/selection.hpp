#pragma once

// Selection (culling weight) functions for Voronoi point processes.

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "vpp/geometry/tessellation.hpp"

namespace vpp::dynamics {

/// S_v(u) = u^alpha on the cell volume u.
struct VolumePower {
  double alpha = 0.0;
};

enum class NeighbourRule {
  vanilla,    // n
  anti_many,  // n^2
  anti_few,   // (max(n,3) - 2)^-2
  anti_6,     // (0.1 + |n - 6|)^-2
  pro_6,      // |n - 6|^2
  pro_5,      // 1 at n = 5, else 5000
  anti_5,     // 5000 at n = 5, else 1
  pro_4,
  anti_4,
  pro_7,
  anti_7,
};

/// S_n evaluated on the number of Voronoi neighbours.
struct NeighbourNamed {
  NeighbourRule rule = NeighbourRule::vanilla;
};

using SelectionSpec = std::variant<VolumePower, NeighbourNamed>;

inline constexpr double kSharpFilterWeight = 5000.0;

inline std::string_view rule_name(NeighbourRule r) {
  switch (r) {
    case NeighbourRule::vanilla: return "vanilla";
    case NeighbourRule::anti_many: return "anti-many";
    case NeighbourRule::anti_few: return "anti-few";
    case NeighbourRule::anti_6: return "anti-6";
    case NeighbourRule::pro_6: return "pro-6";
    case NeighbourRule::pro_5: return "pro-5";
    case NeighbourRule::anti_5: return "anti-5";
    case NeighbourRule::pro_4: return "pro-4";
    case NeighbourRule::anti_4: return "anti-4";
    case NeighbourRule::pro_7: return "pro-7";
    case NeighbourRule::anti_7: return "anti-7";
  }
  return "?";
}

inline NeighbourRule parse_rule(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(NeighbourRule::anti_7); ++i) {
    const auto r = static_cast<NeighbourRule>(i);
    if (rule_name(r) == name) return r;
  }
  throw std::invalid_argument("unknown selection function: " + std::string(name));
}

inline std::string describe(const SelectionSpec& spec) {
  if (const auto* v = std::get_if<VolumePower>(&spec)) {
    return "volume-power(alpha=" + std::to_string(v->alpha) + ")";
  }
  return std::string(rule_name(std::get<NeighbourNamed>(spec).rule));
}

/// Weight of a neighbour count under a named rule.
inline double neighbour_weight(NeighbourRule rule, std::size_t count) {
  const double n = static_cast<double>(count);
  auto sharp = [&](double focus, bool pro) {
    const bool hit = n == focus;
    return (hit != pro) ? kSharpFilterWeight : 1.0;
  };
  switch (rule) {
    case NeighbourRule::vanilla: return n;
    case NeighbourRule::anti_many: return n * n;
    case NeighbourRule::anti_few: {
      // Clipped cells can have two neighbours; clamp n to 3 to stay finite.
      const double m = std::max(n, 3.0) - 2.0;
      return 1.0 / (m * m);
    }
    case NeighbourRule::anti_6: {
      const double d = 0.1 + std::abs(n - 6.0);
      return 1.0 / (d * d);
    }
    case NeighbourRule::pro_6: return (n - 6.0) * (n - 6.0);
    case NeighbourRule::pro_5: return sharp(5, true);
    case NeighbourRule::anti_5: return sharp(5, false);
    case NeighbourRule::pro_4: return sharp(4, true);
    case NeighbourRule::anti_4: return sharp(4, false);
    case NeighbourRule::pro_7: return sharp(7, true);
    case NeighbourRule::anti_7: return sharp(7, false);
  }
  return 1.0;
}

/// Culling weight S(C) of a cell.
inline double selection_weight(const SelectionSpec& spec, const geometry::Cell& cell) {
  if (const auto* v = std::get_if<VolumePower>(&spec)) {
    if (!(cell.area > 0.0))
      throw std::domain_error("selection_weight: cell " + std::to_string(cell.generator_id) +
                              " has non-positive area");
    return std::pow(cell.area, v->alpha);
  }
  return neighbour_weight(std::get<NeighbourNamed>(spec).rule, cell.neighbor_ids.size());
}

}  // namespace vpp::dynamics
