#pragma once

// Voronoi tessellations of the circle, the unit square and the flat torus,
// with in-place single point replacement.
//
// Generators are identified by their index in the configuration; replacing
// a point keeps its index. Planar domains are backed by a dynamic Delaunay
// triangulation: the square directly (cells clipped to [0,1]^2), the torus
// through its 3x3 periodic cover.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vpp/geometry/delaunay.hpp"
#include "vpp/geometry/predicates.hpp"
#include "vpp/geometry/vec2.hpp"

namespace vpp::geometry {

enum class DomainKind { circle, unit_square, torus };

inline std::string_view to_string(DomainKind k) {
  switch (k) {
    case DomainKind::circle: return "circle";
    case DomainKind::unit_square: return "square";
    case DomainKind::torus: return "torus";
  }
  return "?";
}

inline DomainKind parse_domain_kind(std::string_view s) {
  if (s == "circle") return DomainKind::circle;
  if (s == "square" || s == "unit-square") return DomainKind::unit_square;
  if (s == "torus") return DomainKind::torus;
  throw std::invalid_argument("unknown domain kind: " + std::string(s));
}

struct Domain {
  DomainKind kind = DomainKind::unit_square;

  static constexpr double total_measure() { return 1.0; }
  bool planar() const { return kind != DomainKind::circle; }
  bool has_boundary() const { return kind == DomainKind::unit_square; }
  /// Largest distance between two points of the domain.
  double diameter() const {
    switch (kind) {
      case DomainKind::circle: return 0.5;
      case DomainKind::unit_square: return std::sqrt(2.0);
      case DomainKind::torus: return std::sqrt(0.5);
    }
    return 0.0;
  }
};

inline constexpr double kMinSeparation = 1e-12;

/// Points of a configuration; the label of a point is its index. Circle
/// points use only the x coordinate, in [0, 1).
struct Configuration {
  std::vector<Vec2> points;

  std::size_t size() const { return points.size(); }
};

struct Cell {
  std::size_t generator_id = 0;
  double area = 0.0;
  std::vector<std::size_t> neighbor_ids;  // sorted
  bool touches_boundary = false;
  /// Clipped polygon (counter-clockwise) for planar domains; for the circle
  /// the two interval endpoints stored as (left, 0), (right, 0).
  std::vector<Vec2> polygon;
};

/// Rejection of a configuration or placement; `labels` names the points
/// involved.
class GeometryError : public std::invalid_argument {
 public:
  GeometryError(const std::string& what, std::vector<std::size_t> labels)
      : std::invalid_argument(what), labels_(std::move(labels)) {}
  const std::vector<std::size_t>& labels() const { return labels_; }

 private:
  std::vector<std::size_t> labels_;
};

class UnsupportedDomain : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Minimum-image displacement b - a on the unit torus.
inline Vec2 torus_delta(Vec2 a, Vec2 b) {
  Vec2 d = b - a;
  d.x -= std::round(d.x);
  d.y -= std::round(d.y);
  return d;
}

inline double circle_delta(double a, double b) {
  double d = b - a;
  return d - std::round(d);
}

/// Distance between two points under the domain metric.
inline double distance(const Domain& domain, Vec2 a, Vec2 b) {
  switch (domain.kind) {
    case DomainKind::circle: return std::abs(circle_delta(a.x, b.x));
    case DomainKind::unit_square: return norm(b - a);
    case DomainKind::torus: return norm(torus_delta(a, b));
  }
  return 0.0;
}

/// Cell widths on the circle of circumference 1 for sorted positions:
/// half the sum of the gaps to the left and right neighbours.
inline std::vector<double> circle_cells(const std::vector<double>& positions) {
  const std::size_t n = positions.size();
  if (n == 0) throw std::invalid_argument("circle_cells: no positions");
  for (std::size_t i = 0; i < n; ++i) {
    if (positions[i] < 0.0 || positions[i] >= 1.0)
      throw GeometryError("circle_cells: position outside [0,1)", {i});
    if (i > 0 && !(positions[i] > positions[i - 1]))
      throw GeometryError("circle_cells: positions must be strictly increasing", {i - 1, i});
  }
  if (n == 1) return {1.0};
  std::vector<double> gaps(n);  // gaps[i] = distance from i to i+1
  for (std::size_t i = 0; i + 1 < n; ++i) gaps[i] = positions[i + 1] - positions[i];
  gaps[n - 1] = 1.0 - (positions[n - 1] - positions[0]);
  std::vector<double> widths(n);
  for (std::size_t i = 0; i < n; ++i) {
    widths[i] = 0.5 * (gaps[(i + n - 1) % n] + gaps[i]);
  }
  return widths;
}

namespace detail {

// Sutherland-Hodgman clip of a convex polygon to [0,1]^2.
inline std::vector<Vec2> clip_to_unit_square(const std::vector<Vec2>& poly) {
  std::vector<Vec2> cur = poly, next;
  auto clip = [&](auto inside, auto intersect) {
    next.clear();
    const std::size_t n = cur.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 a = cur[i], b = cur[(i + 1) % n];
      const bool ia = inside(a), ib = inside(b);
      if (ia) next.push_back(a);
      if (ia != ib) next.push_back(intersect(a, b));
    }
    std::swap(cur, next);
  };
  auto at_x = [](double x) {
    return [x](Vec2 a, Vec2 b) {
      const double t = (x - a.x) / (b.x - a.x);
      return Vec2{x, a.y + t * (b.y - a.y)};
    };
  };
  auto at_y = [](double y) {
    return [y](Vec2 a, Vec2 b) {
      const double t = (y - a.y) / (b.y - a.y);
      return Vec2{a.x + t * (b.x - a.x), y};
    };
  };
  clip([](Vec2 p) { return p.x >= 0.0; }, at_x(0.0));
  if (cur.empty()) return cur;
  clip([](Vec2 p) { return p.x <= 1.0; }, at_x(1.0));
  if (cur.empty()) return cur;
  clip([](Vec2 p) { return p.y >= 0.0; }, at_y(0.0));
  if (cur.empty()) return cur;
  clip([](Vec2 p) { return p.y <= 1.0; }, at_y(1.0));
  return cur;
}

inline double polygon_area(const std::vector<Vec2>& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * s;
}

// True when the part of segment [a, b] inside [0,1]^2 has positive length.
inline bool segment_crosses_unit_square(Vec2 a, Vec2 b) {
  if (b.x < a.x || (b.x == a.x && b.y < a.y)) std::swap(a, b);
  if (a == b) return a.x > 0.0 && a.x < 1.0 && a.y > 0.0 && a.y < 1.0;
  double t0 = 0.0, t1 = 1.0;
  const double dx = b.x - a.x, dy = b.y - a.y;
  auto edge = [&](double p, double q) {
    // p * t <= q
    if (p == 0.0) return q >= 0.0;
    const double r = q / p;
    if (p < 0.0) {
      if (r > t1) return false;
      t0 = std::max(t0, r);
    } else {
      if (r < t0) return false;
      t1 = std::min(t1, r);
    }
    return true;
  };
  if (!edge(-dx, a.x)) return false;
  if (!edge(dx, 1.0 - a.x)) return false;
  if (!edge(-dy, a.y)) return false;
  if (!edge(dy, 1.0 - a.y)) return false;
  return t1 > t0;
}

inline const std::array<Vec2, 9>& torus_offsets() {
  static const std::array<Vec2, 9> offsets = {
      Vec2{0, 0},  Vec2{-1, -1}, Vec2{0, -1}, Vec2{1, -1}, Vec2{-1, 0},
      Vec2{1, 0},  Vec2{-1, 1},  Vec2{0, 1},  Vec2{1, 1}};
  return offsets;
}

}  // namespace detail

class Tessellation {
 public:
  static constexpr std::size_t kDefaultRebuildPeriod = 1024;

  /// Builds the Voronoi tessellation of `config` on `domain`.
  static Tessellation build(const Configuration& config, Domain domain) {
    Tessellation t;
    t.domain_ = domain;
    t.config_ = config;
    t.check_input();
    t.rebuild();
    return t;
  }

  const Domain& domain() const { return domain_; }
  const Configuration& configuration() const { return config_; }
  std::size_t size() const { return config_.size(); }
  Vec2 point(std::size_t id) const { return config_.points[id]; }
  const Cell& cell(std::size_t id) const { return cells_[id]; }
  const std::vector<Cell>& cells() const { return cells_; }
  std::uint64_t version() const { return version_; }
  /// Underlying triangulation (planar domains only, else null).
  const Delaunay* triangulation() const { return dt_ ? &*dt_ : nullptr; }
  std::size_t rebuild_period() const { return rebuild_period_; }
  /// Replacements between forced full rebuilds; 0 disables them.
  void set_rebuild_period(std::size_t period) { rebuild_period_ = period; }

  /// Moves generator `id` to `p`. Returns the ids of every cell whose area
  /// or neighbour set may have changed (sorted), or nothing when `p` is
  /// closer than kMinSeparation to a surviving point; the tessellation is
  /// then left unchanged.
  std::optional<std::vector<std::size_t>> replace_point(std::size_t id, Vec2 p) {
    if (id >= size()) throw std::out_of_range("replace_point: unknown id");
    p = normalise(p, id);
    std::vector<std::size_t> changed;
    if (domain_.kind == DomainKind::circle) {
      if (!replace_circle(id, p, changed)) return std::nullopt;
    } else {
      if (!replace_planar(id, p, changed)) return std::nullopt;
    }
    ++version_;
    ++since_rebuild_;
    if (rebuild_period_ != 0 && since_rebuild_ >= rebuild_period_) {
      rebuild();
      changed.resize(size());
      std::iota(changed.begin(), changed.end(), std::size_t{0});
    }
    return changed;
  }

  /// Forces a from-scratch rebuild of all structures.
  void rebuild() {
    since_rebuild_ = 0;
    ++version_;
    cells_.assign(size(), Cell{});
    if (domain_.kind == DomainKind::circle) {
      build_circle();
    } else {
      build_planar();
    }
  }

  /// Delaunay edges (i < j) whose cells share a boundary segment of
  /// positive length, sorted.
  std::vector<std::pair<std::size_t, std::size_t>> adjacency() const {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (const Cell& c : cells_)
      for (const std::size_t j : c.neighbor_ids)
        if (c.generator_id < j) edges.emplace_back(c.generator_id, j);
    return edges;
  }

 private:
  Tessellation() = default;

  Vec2 normalise(Vec2 p, std::size_t label) const {
    switch (domain_.kind) {
      case DomainKind::circle:
        p.x -= std::floor(p.x);
        if (p.x >= 1.0) p.x = 0.0;
        p.y = 0.0;
        break;
      case DomainKind::torus:
        p.x -= std::floor(p.x);
        p.y -= std::floor(p.y);
        if (p.x >= 1.0) p.x = 0.0;
        if (p.y >= 1.0) p.y = 0.0;
        break;
      case DomainKind::unit_square:
        if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0))
          throw GeometryError("point outside the unit square", {label});
        break;
    }
    return p;
  }

  void check_input() {
    const std::size_t n = size();
    if (n == 0) throw GeometryError("empty configuration", {});
    for (std::size_t i = 0; i < n; ++i) config_.points[i] = normalise(config_.points[i], i);
    if (domain_.kind == DomainKind::torus && n < 3)
      throw GeometryError("torus tessellation needs at least 3 points", {});
    if (domain_.planar() && n >= 3) {
      bool collinear = true;
      const Vec2 a = config_.points[0], b = config_.points[1];
      for (std::size_t i = 2; i < n && collinear; ++i)
        if (orient(a, b, config_.points[i]) != 0) collinear = false;
      if (collinear) {
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), std::size_t{0});
        throw GeometryError("all points are collinear", std::move(all));
      }
    }
  }

  [[noreturn]] void throw_duplicate(std::size_t id) const {
    for (std::size_t j = 0; j < size(); ++j) {
      if (j != id && distance(domain_, config_.points[j], config_.points[id]) <= kMinSeparation)
        throw GeometryError("points closer than the minimum separation",
                            {std::min(id, j), std::max(id, j)});
    }
    throw GeometryError("points closer than the minimum separation", {id});
  }

  // ---- circle ---------------------------------------------------------

  void build_circle() {
    order_.resize(size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      return config_.points[a].x < config_.points[b].x;
    });
    rank_.assign(size(), 0);
    for (std::size_t r = 0; r < order_.size(); ++r) rank_[order_[r]] = r;
    for (std::size_t r = 0; r < order_.size(); ++r) {
      const std::size_t next = order_[(r + 1) % order_.size()];
      if (order_.size() > 1 &&
          std::abs(circle_delta(config_.points[order_[r]].x, config_.points[next].x)) <=
              kMinSeparation)
        throw_duplicate(order_[r]);
    }
    for (std::size_t id = 0; id < size(); ++id) compute_circle_cell(id);
  }

  std::pair<std::size_t, std::size_t> circle_neighbours(std::size_t id) const {
    const std::size_t n = order_.size();
    const std::size_t r = rank_[id];
    return {order_[(r + n - 1) % n], order_[(r + 1) % n]};
  }

  void compute_circle_cell(std::size_t id) {
    Cell& c = cells_[id];
    c.generator_id = id;
    c.touches_boundary = false;
    c.neighbor_ids.clear();
    const double x = config_.points[id].x;
    if (size() == 1) {
      c.area = 1.0;
      c.polygon = {{x - 0.5, 0.0}, {x + 0.5, 0.0}};
      return;
    }
    const auto [left, right] = circle_neighbours(id);
    double gl = x - config_.points[left].x;
    if (gl <= 0.0) gl += 1.0;
    double gr = config_.points[right].x - x;
    if (gr <= 0.0) gr += 1.0;
    c.area = 0.5 * (gl + gr);
    c.polygon = {{x - 0.5 * gl, 0.0}, {x + 0.5 * gr, 0.0}};
    c.neighbor_ids = {std::min(left, right), std::max(left, right)};
    if (left == right) c.neighbor_ids.pop_back();
  }

  bool replace_circle(std::size_t id, Vec2 p, std::vector<std::size_t>& changed) {
    const std::size_t n = size();
    // Surviving points must stay at least kMinSeparation away.
    if (n > 1) {
      auto it = std::lower_bound(order_.begin(), order_.end(), p.x, [&](std::size_t a, double v) {
        return config_.points[a].x < v;
      });
      const std::size_t pos = static_cast<std::size_t>(it - order_.begin());
      for (const std::size_t cand : {order_[pos % n], order_[(pos + n - 1) % n],
                                     order_[(pos + 1) % n], order_[(pos + n - 2) % n]}) {
        if (cand != id && std::abs(circle_delta(config_.points[cand].x, p.x)) <= kMinSeparation)
          return false;
      }
    }
    if (n > 1) {
      const auto [l, r] = circle_neighbours(id);
      changed.push_back(l);
      changed.push_back(r);
    }
    order_.erase(order_.begin() + static_cast<std::ptrdiff_t>(rank_[id]));
    config_.points[id] = p;
    auto it = std::lower_bound(order_.begin(), order_.end(), p.x, [&](std::size_t a, double v) {
      return config_.points[a].x < v;
    });
    order_.insert(it, id);
    for (std::size_t r = 0; r < order_.size(); ++r) rank_[order_[r]] = r;
    if (n > 1) {
      const auto [l, r] = circle_neighbours(id);
      changed.push_back(l);
      changed.push_back(r);
    }
    changed.push_back(id);
    std::sort(changed.begin(), changed.end());
    changed.erase(std::unique(changed.begin(), changed.end()), changed.end());
    for (const std::size_t c : changed) compute_circle_cell(c);
    return true;
  }

  // ---- planar ---------------------------------------------------------

  std::size_t copies() const { return domain_.kind == DomainKind::torus ? 9 : 1; }

  std::uint64_t key_of(std::size_t id, std::size_t copy) const {
    return static_cast<std::uint64_t>(id) * copies() + copy;
  }
  std::size_t label_of_key(std::uint64_t key) const {
    return static_cast<std::size_t>(key / copies());
  }

  void build_planar() {
    const std::size_t n = size();
    const int res = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(n))));
    if (domain_.kind == DomainKind::torus) {
      dt_.emplace(Vec2{-1.0, -1.0}, Vec2{2.0, 2.0}, 3 * res);
    } else {
      dt_.emplace(Vec2{0.0, 0.0}, Vec2{1.0, 1.0}, res);
    }
    vertex_of_.assign(n * copies(), Delaunay::kNone);

    // Insert along a serpentine bucket order to keep point location local.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const int g = std::max(1, res / 2);
    auto bucket = [&](std::size_t i) {
      const Vec2 p = config_.points[i];
      const int by = std::clamp(static_cast<int>(p.y * g), 0, g - 1);
      int bx = std::clamp(static_cast<int>(p.x * g), 0, g - 1);
      if (by % 2 == 1) bx = g - 1 - bx;
      return by * g + bx;
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return bucket(a) < bucket(b); });
    for (std::size_t c = 0; c < copies(); ++c) {
      for (const std::size_t id : order) {
        if (!insert_copy(id, c)) throw_duplicate(id);
      }
    }
    for (std::size_t id = 0; id < n; ++id) compute_planar_cell(id);
  }

  bool insert_copy(std::size_t id, std::size_t copy) {
    const Vec2 p = config_.points[id] + detail::torus_offsets()[copy];
    const auto v = dt_->insert(p, key_of(id, copy), kMinSeparation);
    if (!v) return false;
    vertex_of_[id * copies() + copy] = *v;
    return true;
  }

  void collect_neighbour_labels(std::size_t id, std::vector<std::size_t>& out) const {
    for (std::size_t c = 0; c < copies(); ++c) {
      const Delaunay::Index v = vertex_of_[id * copies() + c];
      dt_->for_each_edge(v, [&](Delaunay::Index w, Delaunay::Index, Delaunay::Index) {
        if (!Delaunay::is_super(w)) out.push_back(label_of_key(dt_->vertex(w).key));
      });
    }
  }

  bool replace_planar(std::size_t id, Vec2 p, std::vector<std::size_t>& changed) {
    const Vec2 old = config_.points[id];
    collect_neighbour_labels(id, changed);
    for (std::size_t c = 0; c < copies(); ++c) dt_->remove(vertex_of_[id * copies() + c]);
    config_.points[id] = p;
    if (!insert_copy(id, 0)) {
      config_.points[id] = old;
      for (std::size_t c = 0; c < copies(); ++c)
        if (!insert_copy(id, c)) throw std::logic_error("replace_point: failed to restore point");
      return false;
    }
    for (std::size_t c = 1; c < copies(); ++c)
      if (!insert_copy(id, c)) throw std::logic_error("replace_point: periodic copy rejected");
    collect_neighbour_labels(id, changed);
    changed.push_back(id);
    std::sort(changed.begin(), changed.end());
    changed.erase(std::unique(changed.begin(), changed.end()), changed.end());
    for (const std::size_t c : changed) compute_planar_cell(c);
    return true;
  }

  // Voronoi cell of the central copy of `id`, read off the triangulation.
  void compute_planar_cell(std::size_t id) {
    Cell& cell = cells_[id];
    cell.generator_id = id;
    cell.neighbor_ids.clear();
    const Delaunay& dt = *dt_;
    const Delaunay::Index v = vertex_of_[id * copies()];
    const bool square = domain_.kind == DomainKind::unit_square;

    std::vector<Vec2>& poly = scratch_poly_;
    poly.clear();
    dt.for_each_edge(v, [&](Delaunay::Index w, Delaunay::Index left, Delaunay::Index right) {
      const Vec2 a = dt.canonical_circumcenter(left);
      poly.push_back(a);
      if (Delaunay::is_super(w)) return;
      // A cocircular quadruple makes the dual edge a single point.
      const Delaunay::Triangle& rt = dt.triangle(right);
      Delaunay::Index opposite = rt.v[0];
      for (const Delaunay::Index u : rt.v)
        if (u != v && u != w) opposite = u;
      const Delaunay::Triangle& lt = dt.triangle(left);
      if (incircle(dt.vertex(lt.v[0]).pos, dt.vertex(lt.v[1]).pos, dt.vertex(lt.v[2]).pos,
                   dt.vertex(opposite).pos) == 0)
        return;
      const std::size_t other = label_of_key(dt.vertex(w).key);
      if (other == id) return;
      if (square && !detail::segment_crosses_unit_square(a, dt.canonical_circumcenter(right)))
        return;
      cell.neighbor_ids.push_back(other);
    });
    std::sort(cell.neighbor_ids.begin(), cell.neighbor_ids.end());
    cell.neighbor_ids.erase(std::unique(cell.neighbor_ids.begin(), cell.neighbor_ids.end()),
                            cell.neighbor_ids.end());

    // Start at the lexicographically smallest vertex so the result does not
    // depend on the triangulation's internal bookkeeping.
    const auto first = std::min_element(poly.begin(), poly.end(), [](Vec2 a, Vec2 b) {
      return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    std::rotate(poly.begin(), first, poly.end());

    if (square) {
      cell.touches_boundary = std::any_of(poly.begin(), poly.end(), [](Vec2 q) {
        return !(q.x > 0.0 && q.x < 1.0 && q.y > 0.0 && q.y < 1.0);
      });
      cell.polygon = cell.touches_boundary ? detail::clip_to_unit_square(poly) : poly;
    } else {
      cell.touches_boundary = false;
      cell.polygon = poly;
    }
    cell.area = detail::polygon_area(cell.polygon);
  }

  Domain domain_;
  Configuration config_;
  std::vector<Cell> cells_;
  std::uint64_t version_ = 0;
  std::size_t rebuild_period_ = kDefaultRebuildPeriod;
  std::size_t since_rebuild_ = 0;

  // circle
  std::vector<std::size_t> order_;
  std::vector<std::size_t> rank_;

  // planar
  std::optional<Delaunay> dt_;
  std::vector<Delaunay::Index> vertex_of_;
  std::vector<Vec2> scratch_poly_;
};

}  // namespace vpp::geometry
