#pragma once

// Brute-force reference computations for checking the tessellation engine.
// Nothing here shares code with the Delaunay-based implementation.

#include <cmath>
#include <cstddef>
#include <random>
#include <set>
#include <vector>

#include "vpp/geometry/tessellation.hpp"

namespace vpp::brute_force {

using geometry::Configuration;
using geometry::DomainKind;
using geometry::Vec2;

struct OracleCell {
  double area = 0.0;
  std::set<std::size_t> neighbors;
};

namespace detail {

struct TaggedVertex {
  Vec2 p;
  long tag;  // tag of the edge leaving this vertex; -1 = domain boundary
};

// Keeps the part of the polygon where dot(n, y) <= c.
inline std::vector<TaggedVertex> clip(const std::vector<TaggedVertex>& poly, Vec2 n, double c,
                                      long tag) {
  std::vector<TaggedVertex> out;
  const std::size_t k = poly.size();
  for (std::size_t i = 0; i < k; ++i) {
    const TaggedVertex& a = poly[i];
    const TaggedVertex& b = poly[(i + 1) % k];
    const double fa = n.x * a.p.x + n.y * a.p.y - c;
    const double fb = n.x * b.p.x + n.y * b.p.y - c;
    const bool ia = fa <= 0.0, ib = fb <= 0.0;
    if (ia) out.push_back(a);
    if (ia != ib) {
      const double t = fa / (fa - fb);
      const Vec2 x{a.p.x + t * (b.p.x - a.p.x), a.p.y + t * (b.p.y - a.p.y)};
      out.push_back({x, ia ? tag : a.tag});
    }
  }
  return out;
}

}  // namespace detail

/// Each cell built as the intersection of bisector half-planes, clipped to
/// the unit square (square domain) or taken against all periodic images
/// (torus). O(N^2) per cell.
inline std::vector<OracleCell> halfplane_cells(const Configuration& config, DomainKind kind,
                                               double min_edge = 1e-12) {
  const std::size_t n = config.size();
  std::vector<OracleCell> cells(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = config.points[i];
    std::vector<detail::TaggedVertex> poly;
    if (kind == DomainKind::unit_square) {
      poly = {{{0, 0}, -1}, {{1, 0}, -1}, {{1, 1}, -1}, {{0, 1}, -1}};
    } else {
      poly = {{{p.x - 1, p.y - 1}, -1}, {{p.x + 1, p.y - 1}, -1},
              {{p.x + 1, p.y + 1}, -1}, {{p.x - 1, p.y + 1}, -1}};
    }
    for (std::size_t j = 0; j < n; ++j) {
      const int range = kind == DomainKind::torus ? 1 : 0;
      for (int ox = -range; ox <= range; ++ox) {
        for (int oy = -range; oy <= range; ++oy) {
          if (j == i && ox == 0 && oy == 0) continue;
          const Vec2 q{config.points[j].x + ox, config.points[j].y + oy};
          // |y-p|^2 <= |y-q|^2  <=>  2 (q-p).y <= |q|^2 - |p|^2
          const Vec2 nrm{2 * (q.x - p.x), 2 * (q.y - p.y)};
          const double c = (q.x * q.x + q.y * q.y) - (p.x * p.x + p.y * p.y);
          poly = detail::clip(poly, nrm, c, static_cast<long>(j));
        }
      }
    }
    double area = 0.0;
    for (std::size_t k = 0; k < poly.size(); ++k) {
      const Vec2 a = poly[k].p, b = poly[(k + 1) % poly.size()].p;
      area += a.x * b.y - a.y * b.x;
      const double len = std::hypot(b.x - a.x, b.y - a.y);
      if (poly[k].tag >= 0 && static_cast<std::size_t>(poly[k].tag) != i && len > min_edge)
        cells[i].neighbors.insert(static_cast<std::size_t>(poly[k].tag));
    }
    cells[i].area = 0.5 * area;
  }
  return cells;
}

/// Cell areas estimated by assigning `samples` uniform points to their
/// nearest generator.
inline std::vector<double> monte_carlo_areas(const Configuration& config, DomainKind kind,
                                             std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> counts(config.size(), 0.0);
  for (std::size_t s = 0; s < samples; ++s) {
    const Vec2 y{u(rng), u(rng)};
    double best = INFINITY;
    std::size_t arg = 0;
    for (std::size_t j = 0; j < config.size(); ++j) {
      double dx = y.x - config.points[j].x, dy = y.y - config.points[j].y;
      if (kind == DomainKind::torus) {
        dx -= std::round(dx);
        dy -= std::round(dy);
      }
      const double d = dx * dx + dy * dy;
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    counts[arg] += 1.0;
  }
  for (double& c : counts) c /= static_cast<double>(samples);
  return counts;
}

}  // namespace vpp::brute_force
