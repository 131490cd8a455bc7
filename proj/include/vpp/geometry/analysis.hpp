#pragma once

// Derived queries on a tessellation: NN-depth and structural diagnostics.

#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "vpp/geometry/tessellation.hpp"

namespace vpp::geometry {

/// NN-depth of every cell: 1 for cells meeting the boundary of the square,
/// otherwise 1 + the smallest depth among its neighbours.
inline std::vector<int> nn_depths(const Tessellation& tess) {
  if (!tess.domain().has_boundary())
    throw UnsupportedDomain("nn_depth: domain '" + std::string(to_string(tess.domain().kind)) +
                            "' has no boundary");
  const std::size_t n = tess.size();
  std::vector<int> depth(n, 0);
  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < n; ++i) {
    if (tess.cell(i).touches_boundary) {
      depth[i] = 1;
      queue.push_back(i);
    }
  }
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    for (const std::size_t j : tess.cell(i).neighbor_ids) {
      if (depth[j] == 0) {
        depth[j] = depth[i] + 1;
        queue.push_back(j);
      }
    }
  }
  return depth;
}

inline int nn_depth(const Tessellation& tess, std::size_t id) {
  if (id >= tess.size()) throw std::out_of_range("nn_depth: unknown id");
  return nn_depths(tess)[id];
}

struct ValidationReport {
  double area_residual = 0.0;  // |sum of areas - 1|
  std::vector<std::pair<std::size_t, std::size_t>> asymmetric_pairs;
  std::vector<std::size_t> nonpositive_area;
  std::vector<std::size_t> generator_outside;
  double mean_degree = 0.0;
  std::size_t degree_sum = 0;
  bool euler_checked = false;  // torus only
  bool euler_ok = true;        // degree sum == 6N
  bool connected = true;

  bool ok(double area_tolerance = 1e-9) const {
    return area_residual <= area_tolerance && asymmetric_pairs.empty() &&
           nonpositive_area.empty() && generator_outside.empty() && euler_ok && connected;
  }

  std::string summary() const {
    std::ostringstream os;
    os << "area_residual=" << area_residual << " asymmetric=" << asymmetric_pairs.size()
       << " nonpositive_area=" << nonpositive_area.size()
       << " generator_outside=" << generator_outside.size() << " mean_degree=" << mean_degree
       << " euler=" << (euler_checked ? (euler_ok ? "ok" : "FAIL") : "n/a")
       << " connected=" << (connected ? "yes" : "no");
    return os.str();
  }
};

namespace detail {

inline bool inside_convex(const std::vector<Vec2>& poly, Vec2 p, double tol) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i], b = poly[(i + 1) % n];
    if (a == b) continue;
    const double len = norm(b - a);
    if (cross(b - a, p - a) / len < -tol) return false;
  }
  return true;
}

}  // namespace detail

inline ValidationReport validate(const Tessellation& tess) {
  ValidationReport r;
  const std::size_t n = tess.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Cell& c = tess.cell(i);
    total += c.area;
    if (!(c.area > 0.0)) r.nonpositive_area.push_back(i);
    r.degree_sum += c.neighbor_ids.size();
    for (const std::size_t j : c.neighbor_ids) {
      const auto& back = tess.cell(j).neighbor_ids;
      if (!std::binary_search(back.begin(), back.end(), i)) r.asymmetric_pairs.emplace_back(i, j);
    }
    const Vec2 g = tess.point(i);
    if (tess.domain().planar()) {
      if (!detail::inside_convex(c.polygon, g, 1e-12)) r.generator_outside.push_back(i);
    } else {
      if (!(c.polygon[0].x <= g.x && g.x <= c.polygon[1].x)) r.generator_outside.push_back(i);
    }
  }
  r.area_residual = std::abs(total - Domain::total_measure());
  r.mean_degree = n ? static_cast<double>(r.degree_sum) / static_cast<double>(n) : 0.0;
  if (tess.domain().kind == DomainKind::torus) {
    r.euler_checked = true;
    r.euler_ok = r.degree_sum == 6 * n;
  }
  std::vector<char> seen(n, 0);
  std::deque<std::size_t> queue{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    for (const std::size_t j : tess.cell(i).neighbor_ids)
      if (!seen[j]) {
        seen[j] = 1;
        ++reached;
        queue.push_back(j);
      }
  }
  r.connected = reached == n;
  return r;
}

}  // namespace vpp::geometry
