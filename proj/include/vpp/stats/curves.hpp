#pragma once

// Empty-space (F), nearest-neighbour (G) and J-function estimates on the
// unit square or the torus, plus averaging and smoothing of J curves.
//
// Border correction on the square is minus-sampling with a fixed margin
// equal to the largest radius of the grid: reference locations (for F) and
// included points (for G) closer than that to the boundary are dropped, so
// each estimate is a proper distribution function on the grid. If the margin
// would leave nothing, no correction is applied.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "vpp/geometry/tessellation.hpp"
#include "vpp/stats/regression.hpp"

namespace vpp::stats {

using geometry::Domain;
using geometry::DomainKind;
using geometry::Vec2;

inline constexpr double kReliableF = 0.85;
inline constexpr int kDefaultReferenceGrid = 128;
inline constexpr int kDefaultRadii = 64;

/// Uniform bucket grid for nearest-point queries on the square or torus.
class PointGrid {
 public:
  PointGrid(const std::vector<Vec2>& points, bool periodic)
      : points_(points), periodic_(periodic) {
    if (points_.empty()) throw std::invalid_argument("PointGrid: no points");
    res_ = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(points_.size()) / 2.0)));
    buckets_.assign(static_cast<std::size_t>(res_) * res_, {});
    for (std::size_t i = 0; i < points_.size(); ++i) buckets_[slot(points_[i])].push_back(i);
  }

  /// Distance from q to the nearest point other than `exclude`.
  double nearest(Vec2 q, std::size_t exclude = std::numeric_limits<std::size_t>::max()) const {
    const double h = 1.0 / res_;
    const int cx = cell(q.x), cy = cell(q.y);
    double best2 = std::numeric_limits<double>::infinity();
    auto visit = [&](std::size_t i) {
      if (i == exclude) return;
      const Vec2 d = periodic_ ? geometry::torus_delta(q, points_[i]) : points_[i] - q;
      best2 = std::min(best2, geometry::norm2(d));
    };
    for (int ring = 0;; ++ring) {
      // Points outside the block of radius ring - 1 are at least (ring - 1) h away.
      if (ring > 0) {
        const double reach = (ring - 1) * h;
        if (best2 <= reach * reach) break;
      }
      if (2 * ring + 1 >= res_) {
        for (std::size_t i = 0; i < points_.size(); ++i) visit(i);
        break;
      }
      for (int dy = -ring; dy <= ring; ++dy) {
        for (int dx = -ring; dx <= ring; ++dx) {
          if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
          int bx = cx + dx, by = cy + dy;
          if (periodic_) {
            bx = (bx + res_) % res_;
            by = (by + res_) % res_;
          } else if (bx < 0 || by < 0 || bx >= res_ || by >= res_) {
            continue;
          }
          for (const std::size_t i : buckets_[static_cast<std::size_t>(by) * res_ + bx]) visit(i);
        }
      }
    }
    return std::sqrt(best2);
  }

 private:
  int cell(double u) const {
    return std::clamp(static_cast<int>(std::floor(u * res_)), 0, res_ - 1);
  }
  std::size_t slot(Vec2 p) const {
    return static_cast<std::size_t>(cell(p.y)) * res_ + cell(p.x);
  }

  std::vector<Vec2> points_;
  bool periodic_;
  int res_ = 1;
  std::vector<std::vector<std::size_t>> buckets_;
};

namespace detail {

inline void check_grid(const std::vector<double>& r_grid, const Domain& domain) {
  if (r_grid.empty()) throw std::invalid_argument("curve: empty radius grid");
  for (std::size_t i = 1; i < r_grid.size(); ++i)
    if (!(r_grid[i] > r_grid[i - 1]))
      throw std::invalid_argument("curve: radius grid must be strictly increasing");
  if (r_grid.front() < 0.0) throw std::invalid_argument("curve: negative radius");
  if (r_grid.back() > domain.diameter() + 1e-12)
    throw std::invalid_argument("curve: radius exceeds the domain diameter");
  if (!domain.planar()) throw geometry::UnsupportedDomain("curve: planar domains only");
}

inline double boundary_distance(Vec2 p) {
  return std::min({p.x, 1.0 - p.x, p.y, 1.0 - p.y});
}

// Empirical CDF of `d` on the grid, over entries with keep[i].
inline std::vector<double> ecdf(const std::vector<double>& d, const std::vector<char>& keep,
                                const std::vector<double>& r_grid) {
  std::vector<double> kept;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (keep[i]) kept.push_back(d[i]);
  std::sort(kept.begin(), kept.end());
  std::vector<double> out(r_grid.size(), 1.0);
  if (kept.empty()) return out;
  for (std::size_t k = 0; k < r_grid.size(); ++k) {
    const auto it = std::upper_bound(kept.begin(), kept.end(), r_grid[k]);
    out[k] = static_cast<double>(it - kept.begin()) / static_cast<double>(kept.size());
  }
  return out;
}

inline std::vector<char> eroded(const std::vector<Vec2>& locations, double margin) {
  std::vector<char> keep(locations.size(), 1);
  std::size_t n = 0;
  for (std::size_t i = 0; i < locations.size(); ++i) {
    keep[i] = boundary_distance(locations[i]) >= margin;
    n += keep[i];
  }
  if (n == 0) std::fill(keep.begin(), keep.end(), 1);
  return keep;
}

}  // namespace detail

inline std::vector<Vec2> reference_grid(int resolution) {
  std::vector<Vec2> g;
  g.reserve(static_cast<std::size_t>(resolution) * resolution);
  for (int j = 0; j < resolution; ++j)
    for (int i = 0; i < resolution; ++i)
      g.push_back({(i + 0.5) / resolution, (j + 0.5) / resolution});
  return g;
}

/// F-hat(r): fraction of reference locations within r of a process point.
inline std::vector<double> empty_space_F(const std::vector<Vec2>& points,
                                         const std::vector<double>& r_grid, const Domain& domain,
                                         int grid_resolution = kDefaultReferenceGrid) {
  detail::check_grid(r_grid, domain);
  if (points.empty()) throw std::invalid_argument("empty_space_F: no points");
  const bool periodic = domain.kind == DomainKind::torus;
  const PointGrid grid(points, periodic);
  const auto locations = reference_grid(grid_resolution);
  std::vector<double> d(locations.size());
  for (std::size_t i = 0; i < locations.size(); ++i) d[i] = grid.nearest(locations[i]);
  const std::vector<char> keep = periodic ? std::vector<char>(locations.size(), 1)
                                          : detail::eroded(locations, r_grid.back());
  return detail::ecdf(d, keep, r_grid);
}

/// G-hat(r): fraction of included points whose nearest other point is
/// within r.
inline std::vector<double> nn_distance_G(const std::vector<Vec2>& points,
                                         const std::vector<double>& r_grid, const Domain& domain,
                                         const std::vector<std::size_t>& included_ids) {
  detail::check_grid(r_grid, domain);
  if (points.size() < 2) throw std::invalid_argument("nn_distance_G: needs at least 2 points");
  if (included_ids.empty()) throw std::invalid_argument("nn_distance_G: empty inclusion set");
  const bool periodic = domain.kind == DomainKind::torus;
  const PointGrid grid(points, periodic);
  std::vector<Vec2> sites;
  std::vector<double> d;
  for (const std::size_t id : included_ids) {
    sites.push_back(points.at(id));
    d.push_back(grid.nearest(points[id], id));
  }
  const std::vector<char> keep = periodic ? std::vector<char>(sites.size(), 1)
                                          : detail::eroded(sites, r_grid.back());
  return detail::ecdf(d, keep, r_grid);
}

/// Radii 0 .. r85 (inclusive, `count` points) where r85 is the smallest
/// radius at which an unconditioned pilot F-hat reaches 0.85.
inline std::vector<double> default_r_grid(const std::vector<Vec2>& points, const Domain& domain,
                                          int count = kDefaultRadii,
                                          int grid_resolution = kDefaultReferenceGrid) {
  const PointGrid grid(points, domain.kind == DomainKind::torus);
  const auto locations = reference_grid(grid_resolution);
  std::vector<double> d(locations.size());
  for (std::size_t i = 0; i < locations.size(); ++i) d[i] = grid.nearest(locations[i]);
  std::sort(d.begin(), d.end());
  const std::size_t k =
      static_cast<std::size_t>(std::ceil(kReliableF * static_cast<double>(d.size()))) - 1;
  const double r85 = d[k];
  std::vector<double> r(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) r[static_cast<std::size_t>(i)] = r85 * i / (count - 1);
  return r;
}

/// A J-function estimate on a radius grid. J and lnJ are meaningful only
/// where mask is set (F-hat <= 0.85 and, for lnJ, J > 0).
struct CurveData {
  std::vector<double> r;
  std::vector<double> F, G, J, lnJ;
  std::vector<char> mask;
  std::vector<double> sd_J, sd_lnJ;  // zero for a single draw
  std::size_t draws = 1;
};

inline CurveData j_estimate(const std::vector<double>& r_grid, const std::vector<double>& F,
                            const std::vector<double>& G) {
  if (F.size() != r_grid.size() || G.size() != r_grid.size())
    throw std::invalid_argument("j_estimate: F, G and r grid differ in length");
  CurveData c;
  c.r = r_grid;
  c.F = F;
  c.G = G;
  const std::size_t n = r_grid.size();
  c.J.assign(n, std::numeric_limits<double>::quiet_NaN());
  c.lnJ.assign(n, std::numeric_limits<double>::quiet_NaN());
  c.mask.assign(n, 0);
  c.sd_J.assign(n, 0.0);
  c.sd_lnJ.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (F[k] > kReliableF) continue;
    c.J[k] = (1.0 - G[k]) / (1.0 - F[k]);
    if (c.J[k] > 0.0) {
      c.lnJ[k] = std::log(c.J[k]);
      c.mask[k] = 1;
    }
  }
  return c;
}

/// Full estimate for one pattern; `included_ids` selects the G sites.
inline CurveData estimate_curve(const std::vector<Vec2>& points, const std::vector<double>& r_grid,
                                const Domain& domain,
                                const std::vector<std::size_t>& included_ids,
                                int grid_resolution = kDefaultReferenceGrid) {
  const auto F = empty_space_F(points, r_grid, domain, grid_resolution);
  const auto G = nn_distance_G(points, r_grid, domain, included_ids);
  return j_estimate(r_grid, F, G);
}

/// Pointwise mean over draws, with sample standard deviation of J and its
/// delta-method counterpart for ln J; lnJ of the result is ln(mean J).
inline CurveData average_curves(const std::vector<CurveData>& curves) {
  if (curves.empty()) throw std::invalid_argument("average_curves: no curves");
  const std::size_t n = curves.front().r.size();
  for (const auto& c : curves)
    if (c.r != curves.front().r)
      throw std::invalid_argument("average_curves: radius grids differ");
  const double m = static_cast<double>(curves.size());
  CurveData out;
  out.r = curves.front().r;
  out.draws = curves.size();
  out.F.assign(n, 0.0);
  out.G.assign(n, 0.0);
  out.J.assign(n, std::numeric_limits<double>::quiet_NaN());
  out.lnJ.assign(n, std::numeric_limits<double>::quiet_NaN());
  out.mask.assign(n, 1);
  out.sd_J.assign(n, 0.0);
  out.sd_lnJ.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double sj = 0.0;
    for (const auto& c : curves) {
      out.F[k] += c.F[k] / m;
      out.G[k] += c.G[k] / m;
      if (!c.mask[k]) out.mask[k] = 0;
    }
    if (!out.mask[k]) continue;
    for (const auto& c : curves) sj += c.J[k];
    const double mean = sj / m;
    double ss = 0.0;
    for (const auto& c : curves) ss += (c.J[k] - mean) * (c.J[k] - mean);
    out.J[k] = mean;
    out.sd_J[k] = curves.size() > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
    out.lnJ[k] = std::log(mean);
    out.sd_lnJ[k] = out.sd_J[k] / mean;
  }
  return out;
}

/// Weighted cubic (by default) fit of ln J on r over the mask, with weights
/// 1/sd(ln J). Standard deviations of zero (r = 0) are floored at the
/// smallest positive one.
inline RegressionFit smooth_lnJ(const CurveData& c, int degree = 3) {
  double floor_sd = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < c.r.size(); ++k)
    if (c.mask[k] && c.sd_lnJ[k] > 0.0) floor_sd = std::min(floor_sd, c.sd_lnJ[k]);
  if (!std::isfinite(floor_sd)) floor_sd = 1.0;
  std::vector<double> xs, ys, ws;
  for (std::size_t k = 0; k < c.r.size(); ++k) {
    if (!c.mask[k]) continue;
    xs.push_back(c.r[k]);
    ys.push_back(c.lnJ[k]);
    ws.push_back(1.0 / std::max(c.sd_lnJ[k], floor_sd));
  }
  return weighted_poly_regression(xs, ys, ws, degree);
}

}  // namespace vpp::stats
