#pragma once

// Areas of unions of equal-radius disks.
//
// Unclipped areas are exact up to rounding: the boundary of the region is a
// union of circular arcs and the area is the sum of their Green's-theorem
// integrals. Clipped areas (intersected with the unit square) use a
// vertical-chord midpoint rule for disks that cross the boundary.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "vpp/geometry/vec2.hpp"

namespace vpp::aipp {

using geometry::Vec2;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

namespace detail {

using Interval = std::pair<double, double>;

// Angular interval of the circle (c, rho) lying inside disk (d, rho), or
// nothing when the disks are disjoint. A disk with the same centre covers
// the whole circle.
inline bool covered_arc(Vec2 c, Vec2 d, double rho, Interval& out) {
  const Vec2 v = d - c;
  const double dist = geometry::norm(v);
  if (dist >= 2.0 * rho) return false;
  if (dist == 0.0) {
    out = {0.0, kTwoPi};
    return true;
  }
  const double phi = std::atan2(v.y, v.x);
  const double h = std::acos(dist / (2.0 * rho));
  out = {phi - h, phi + h};
  return true;
}

// Splits an interval of length <= 2 pi into pieces within [0, 2 pi).
inline void push_normalised(Interval iv, std::vector<Interval>& out) {
  if (iv.second - iv.first >= kTwoPi) {
    out.push_back({0.0, kTwoPi});
    return;
  }
  double a = std::fmod(iv.first, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  const double b = a + (iv.second - iv.first);
  if (b <= kTwoPi) {
    out.push_back({a, b});
  } else {
    out.push_back({a, kTwoPi});
    out.push_back({0.0, b - kTwoPi});
  }
}

// Sorts and merges normalised intervals in place into a disjoint union.
inline void merge(std::vector<Interval>& v) {
  std::sort(v.begin(), v.end());
  std::size_t k = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (k > 0 && v[i].first <= v[k - 1].second)
      v[k - 1].second = std::max(v[k - 1].second, v[i].second);
    else
      v[k++] = v[i];
  }
  v.resize(k);
}

// Green's-theorem integral (1/2) * integral of (x dy - y dx) over the CCW arc.
inline double arc_integral(Vec2 c, double rho, double a, double b) {
  return 0.5 * (rho * rho * (b - a) +
                rho * (c.x * (std::sin(b) - std::sin(a)) - c.y * (std::cos(b) - std::cos(a))));
}

inline double arcs_integral(Vec2 c, double rho, const std::vector<Interval>& arcs) {
  double s = 0.0;
  for (const Interval& iv : arcs) s += arc_integral(c, rho, iv.first, iv.second);
  return s;
}

// Integral over the parts of arc t (within [0, 2 pi)) outside `cover` (merged).
inline double uncovered_arcs_integral(Vec2 c, double rho, Interval t,
                                      const std::vector<Interval>& cover) {
  double s = 0.0;
  double start = t.first;
  for (const Interval& iv : cover) {
    if (iv.second <= start) continue;
    if (iv.first >= t.second) break;
    if (iv.first > start) s += arc_integral(c, rho, start, iv.first);
    start = std::max(start, iv.second);
    if (start >= t.second) break;
  }
  if (start < t.second) s += arc_integral(c, rho, start, t.second);
  return s;
}

struct Workspace {
  std::vector<Vec2> near;
  std::vector<Interval> cover, target;
};

inline Workspace& workspace() {
  thread_local Workspace w;
  return w;
}

inline void collect_near(Vec2 u, const std::vector<Vec2>& others, double rho,
                         std::vector<Vec2>& near) {
  near.clear();
  for (const Vec2& p : others)
    if (geometry::norm2(p - u) < 4.0 * rho * rho) near.push_back(p);
}

}  // namespace detail

/// Area of B(u, rho) not covered by any disk in `others` (all radius rho).
/// Only disks within 2 rho of u matter; callers may pass a superset.
inline double uncovered_area(Vec2 u, const std::vector<Vec2>& others, double rho) {
  using detail::Interval;
  auto& ws = detail::workspace();
  auto& near = ws.near;
  detail::collect_near(u, others, rho, near);
  const double full = std::numbers::pi * rho * rho;
  if (near.empty()) return full;
  for (const Vec2& p : near)
    if (p == u) return 0.0;

  // Area of B(u) intersected with the union of the nearby disks, as a
  // boundary integral: arcs of the circle about u inside the union, plus
  // arcs of each nearby circle inside B(u) and outside the other disks.
  auto& cover = ws.cover;
  auto& target = ws.target;
  Interval iv;
  cover.clear();
  for (const Vec2& p : near)
    if (detail::covered_arc(u, p, rho, iv)) detail::push_normalised(iv, cover);
  detail::merge(cover);
  double inter = detail::arcs_integral(u, rho, cover);

  for (std::size_t j = 0; j < near.size(); ++j) {
    if (!detail::covered_arc(near[j], u, rho, iv)) continue;
    target.clear();
    detail::push_normalised(iv, target);
    cover.clear();
    for (std::size_t k = 0; k < near.size(); ++k) {
      if (k == j) continue;
      if (near[k] == near[j]) {
        // Coincident disks share a boundary; count it once.
        if (k < j) detail::push_normalised({0.0, kTwoPi}, cover);
        continue;
      }
      if (detail::covered_arc(near[j], near[k], rho, iv)) detail::push_normalised(iv, cover);
    }
    detail::merge(cover);
    for (const Interval& t : target) inter += detail::uncovered_arcs_integral(near[j], rho, t, cover);
  }
  return std::clamp(full - inter, 0.0, full);
}

/// Area of the union of radius-rho disks in the plane.
inline double union_area(const std::vector<Vec2>& centres, double rho) {
  using detail::Interval;
  std::vector<Vec2> c = centres;
  std::sort(c.begin(), c.end(),
            [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  std::vector<Interval> cover;
  double total = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    cover.clear();
    Interval iv;
    bool hidden = false;
    std::size_t lo = i;
    while (lo > 0 && c[i].x - c[lo - 1].x < 2.0 * rho) --lo;
    for (std::size_t k = lo; k < c.size() && c[k].x - c[i].x < 2.0 * rho && !hidden; ++k) {
      if (k == i) continue;
      if (c[k] == c[i]) {
        hidden = k < i;
        continue;
      }
      if (detail::covered_arc(c[i], c[k], rho, iv)) detail::push_normalised(iv, cover);
    }
    if (hidden) continue;
    detail::merge(cover);
    total += detail::uncovered_arcs_integral(c[i], rho, {0.0, kTwoPi}, cover);
  }
  return total;
}

namespace detail {

// Length of the union of the vertical chords at abscissa x of the disks in
// `near`, intersected with [lo, hi].
inline double chord_cover(double x, const std::vector<Vec2>& near, double rho, double lo,
                          double hi, std::vector<Interval>& iv) {
  iv.clear();
  for (const Vec2& p : near) {
    const double dx = x - p.x;
    const double h2 = rho * rho - dx * dx;
    if (h2 <= 0.0) continue;
    const double h = std::sqrt(h2);
    const double a = std::max(lo, p.y - h), b = std::min(hi, p.y + h);
    if (a < b) iv.push_back({a, b});
  }
  merge(iv);
  double len = 0.0;
  for (const Interval& m : iv) len += m.second - m.first;
  return len;
}

}  // namespace detail

inline constexpr int kClipStrips = 1024;

/// Area of (B(u, rho) \ union of `others`) within the unit square.
inline double uncovered_area_clipped(Vec2 u, const std::vector<Vec2>& others, double rho) {
  const bool interior =
      u.x - rho >= 0.0 && u.x + rho <= 1.0 && u.y - rho >= 0.0 && u.y + rho <= 1.0;
  if (interior) return uncovered_area(u, others, rho);
  auto& ws = detail::workspace();
  std::vector<Vec2> near;
  detail::collect_near(u, others, rho, near);
  const double x0 = std::max(0.0, u.x - rho), x1 = std::min(1.0, u.x + rho);
  if (!(x1 > x0)) return 0.0;
  // Substituting x = u.x + rho sin(t) removes the square-root endpoint
  // behaviour of the chord length.
  const double t0 = std::asin(std::clamp((x0 - u.x) / rho, -1.0, 1.0));
  const double t1 = std::asin(std::clamp((x1 - u.x) / rho, -1.0, 1.0));
  const double dt = (t1 - t0) / kClipStrips;
  double area = 0.0;
  for (int s = 0; s < kClipStrips; ++s) {
    const double t = t0 + (s + 0.5) * dt;
    const double x = u.x + rho * std::sin(t);
    const double h = rho * std::cos(t);
    const double lo = std::max(0.0, u.y - h), hi = std::min(1.0, u.y + h);
    if (!(hi > lo)) continue;
    const double covered = detail::chord_cover(x, near, rho, lo, hi, ws.cover);
    area += (hi - lo - covered) * h * dt;
  }
  return std::max(area, 0.0);
}

/// Area of the union of radius-rho disks intersected with the unit square,
/// accumulated by successive insertion.
inline double union_area_clipped(const std::vector<Vec2>& centres, double rho) {
  double total = 0.0;
  std::vector<Vec2> prefix;
  for (const Vec2& c : centres) {
    total += uncovered_area_clipped(c, prefix, rho);
    prefix.push_back(c);
  }
  return total;
}

}  // namespace vpp::aipp
