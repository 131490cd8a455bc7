#pragma once

// Dynamic planar Delaunay triangulation supporting point insertion
// (Bowyer-Watson cavity) and point deletion (Delaunay ear filling of the
// vertex star). All points live strictly inside a large enclosing triangle
// whose three vertices are never removed, so every triangle is finite.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vpp/geometry/predicates.hpp"
#include "vpp/geometry/vec2.hpp"

namespace vpp::geometry {

class Delaunay {
 public:
  using Index = std::uint32_t;
  static constexpr Index kNone = std::numeric_limits<Index>::max();
  // Keys of the three enclosing vertices are kSuperKey, kSuperKey-1, kSuperKey-2.
  static constexpr std::uint64_t kSuperKey = std::numeric_limits<std::uint64_t>::max();

  struct Triangle {
    std::array<Index, 3> v{kNone, kNone, kNone};  // counter-clockwise
    std::array<Index, 3> n{kNone, kNone, kNone};  // n[i] is opposite v[i]
    bool alive = false;
  };

  struct Vertex {
    Vec2 pos;
    std::uint64_t key = 0;  // caller-supplied identity, used for canonical ordering
    Index tri = kNone;      // some incident triangle
    bool alive = false;
  };

  /// Triangulation of an empty point set living in the box [lo, hi]^2.
  /// `hint_resolution` sets the side of the point-location hint grid.
  Delaunay(Vec2 lo, Vec2 hi, int hint_resolution = 16)
      : lo_(lo), hi_(hi), hint_res_(std::max(1, hint_resolution)) {
    const double span = std::max(hi.x - lo.x, hi.y - lo.y);
    const Vec2 a{lo.x - 10.0 * span, lo.y - 10.0 * span};
    const Vec2 b{lo.x + 31.0 * span, lo.y - 10.0 * span};
    const Vec2 c{lo.x - 10.0 * span, lo.y + 31.0 * span};
    std::uint64_t key = kSuperKey;
    for (const Vec2 p : {a, b, c}) {
      vertices_.push_back({p, key--, 0, true});
    }
    triangles_.push_back({{0, 1, 2}, {kNone, kNone, kNone}, true});
    last_tri_ = 0;
    hints_.assign(static_cast<std::size_t>(hint_res_) * hint_res_, kNone);
  }

  static bool is_super(Index v) { return v < 3; }

  const Vertex& vertex(Index v) const { return vertices_[v]; }
  const Triangle& triangle(Index t) const { return triangles_[t]; }
  std::size_t vertex_capacity() const { return vertices_.size(); }
  std::size_t triangle_capacity() const { return triangles_.size(); }
  std::size_t live_vertex_count() const { return live_vertices_; }

  /// Inserts `p`. Returns nothing (and leaves the triangulation untouched)
  /// when an existing vertex lies within `min_separation` of `p`.
  std::optional<Index> insert(Vec2 p, std::uint64_t key, double min_separation) {
    const Index start = locate(p);
    collect_cavity(start, p);

    const double sep2 = min_separation * min_separation;
    for (const auto& e : boundary_) {
      if (!is_super(e.a) && norm2(vertices_[e.a].pos - p) <= sep2) {
        clear_marks();
        return std::nullopt;
      }
    }

    const Index vid = new_vertex(p, key);

    // One new triangle (a, b, vid) per boundary edge.
    new_tris_.clear();
    for (const auto& e : boundary_) {
      const Index t = new_triangle({e.a, e.b, vid});
      new_tris_.push_back(t);
      set_neighbor(t, 2, e.outside);
      vertices_[e.a].tri = t;
      vertices_[e.b].tri = t;
    }
    vertices_[vid].tri = new_tris_.front();
    // Link the fan: triangle (a, b, p) meets (b, c, p) across edge (b, p).
    for (std::size_t i = 0; i < new_tris_.size(); ++i) {
      const Index t = new_tris_[i];
      const Index b = triangles_[t].v[1];
      for (std::size_t j = 0; j < new_tris_.size(); ++j) {
        const Index u = new_tris_[j];
        if (triangles_[u].v[0] == b) {
          triangles_[t].n[0] = u;
          triangles_[u].n[1] = t;
          break;
        }
      }
    }
    for (const Index t : cavity_) free_triangle(t);
    clear_marks();
    last_tri_ = new_tris_.front();
    set_hint(p, vid);
    return vid;
  }

  /// Removes a non-enclosing vertex and re-triangulates its star.
  void remove(Index vid) {
    if (is_super(vid) || vid >= vertices_.size() || !vertices_[vid].alive) {
      throw std::invalid_argument("Delaunay::remove: not a live vertex");
    }
    // Star of vid in counter-clockwise order: link polygon and outer neighbours.
    link_.clear();
    outer_.clear();
    star_.clear();
    const Index t0 = vertices_[vid].tri;
    Index t = t0;
    do {
      const int i = index_in(t, vid);
      const Triangle& tr = triangles_[t];
      link_.push_back(tr.v[(i + 1) % 3]);
      outer_.push_back(tr.n[i]);
      star_.push_back(t);
      t = tr.n[(i + 1) % 3];
    } while (t != t0);

    // Detach: outer triangles temporarily point nowhere.
    for (std::size_t j = 0; j < star_.size(); ++j) {
      const Index o = outer_[j];
      if (o != kNone) {
        Triangle& ot = triangles_[o];
        for (auto& nb : ot.n)
          if (nb == star_[j]) nb = kNone;
      }
    }
    for (const Index s : star_) free_triangle(s);

    fill_polygon();

    vertices_[vid].alive = false;
    vertices_[vid].tri = kNone;
    free_vertices_.push_back(vid);
    --live_vertices_;
  }

  /// Calls f(triangle) for each triangle incident to `vid`, counter-clockwise.
  template <typename F>
  void for_each_incident_triangle(Index vid, F&& f) const {
    const Index t0 = vertices_[vid].tri;
    Index t = t0;
    do {
      f(t);
      const int i = index_in(t, vid);
      t = triangles_[t].n[(i + 1) % 3];
    } while (t != t0);
  }

  /// Calls f(neighbour vertex, triangle left of edge, triangle right of
  /// edge) for every edge (vid, neighbour), counter-clockwise around vid.
  template <typename F>
  void for_each_edge(Index vid, F&& f) const {
    const Index t0 = vertices_[vid].tri;
    Index t = t0;
    do {
      const int i = index_in(t, vid);
      const Index next = triangles_[t].n[(i + 1) % 3];
      f(triangles_[t].v[(i + 2) % 3], t, next);
      t = next;
    } while (t != t0);
  }

  int index_in_checked(Index t, Index vid) const {
    for (int i = 0; i < 3; ++i)
      if (triangles_[t].v[i] == vid) return i;
    return -1;
  }

  int index_in(Index t, Index vid) const {
    const Triangle& tr = triangles_[t];
    if (tr.v[0] == vid) return 0;
    if (tr.v[1] == vid) return 1;
    return 2;
  }

  /// Circumcentre computed from the vertices sorted by key, so that the
  /// value does not depend on how the triangle happens to be stored.
  Vec2 canonical_circumcenter(Index t) const {
    std::array<Index, 3> v = triangles_[t].v;
    std::sort(v.begin(), v.end(),
              [&](Index a, Index b) { return vertices_[a].key < vertices_[b].key; });
    return circumcenter(vertices_[v[0]].pos, vertices_[v[1]].pos, vertices_[v[2]].pos);
  }

  /// Structural self-check: neighbour symmetry, orientation, vertex
  /// back-references and the empty-circumcircle property. Returns an empty
  /// string when consistent. O(T) plus one in-circle test per edge.
  std::string check() const {
    for (Index t = 0; t < triangles_.size(); ++t) {
      const Triangle& tr = triangles_[t];
      if (!tr.alive) continue;
      for (int i = 0; i < 3; ++i) {
        if (!vertices_[tr.v[i]].alive) return "triangle " + std::to_string(t) + " uses dead vertex";
      }
      if (orient(vertices_[tr.v[0]].pos, vertices_[tr.v[1]].pos, vertices_[tr.v[2]].pos) <= 0)
        return "triangle " + std::to_string(t) + " not counter-clockwise";
      for (int i = 0; i < 3; ++i) {
        const Index u = tr.n[i];
        if (u == kNone) continue;
        if (!triangles_[u].alive) return "triangle " + std::to_string(t) + " links dead triangle";
        const Triangle& ut = triangles_[u];
        int back = -1;
        for (int k = 0; k < 3; ++k)
          if (ut.n[k] == t) back = k;
        if (back < 0) return "asymmetric link " + std::to_string(t) + "-" + std::to_string(u);
        if (incircle(vertices_[tr.v[0]].pos, vertices_[tr.v[1]].pos, vertices_[tr.v[2]].pos,
                     vertices_[ut.v[back]].pos) > 0)
          return "non-Delaunay edge " + std::to_string(t) + "-" + std::to_string(u);
      }
    }
    for (Index v = 0; v < vertices_.size(); ++v) {
      if (!vertices_[v].alive) continue;
      const Index t = vertices_[v].tri;
      if (t == kNone || !triangles_[t].alive || index_in_checked(t, v) < 0)
        return "vertex " + std::to_string(v) + " has a stale triangle";
    }
    return {};
  }

  /// Triangle containing p (p may lie on its boundary).
  Index locate(Vec2 p) const {
    Index t = start_triangle(p);
    int rot = 0;
    for (;;) {
      const Triangle& tr = triangles_[t];
      bool moved = false;
      for (int k = 0; k < 3; ++k) {
        const int i = (k + rot) % 3;
        const Vec2 a = vertices_[tr.v[(i + 1) % 3]].pos;
        const Vec2 b = vertices_[tr.v[(i + 2) % 3]].pos;
        if (orient(a, b, p) < 0) {
          if (tr.n[i] == kNone) throw std::domain_error("Delaunay::locate: point outside hull");
          t = tr.n[i];
          moved = true;
          break;
        }
      }
      if (!moved) return t;
      rot = (rot + 1) % 3;
    }
  }

 private:
  struct BoundaryEdge {
    Index a, b, outside;
  };

  Index start_triangle(Vec2 p) const {
    const Index h = hints_[hint_slot(p)];
    if (h != kNone && vertices_[h].alive) return vertices_[h].tri;
    if (triangles_[last_tri_].alive) return last_tri_;
    for (Index t = 0; t < triangles_.size(); ++t)
      if (triangles_[t].alive) return t;
    throw std::logic_error("Delaunay: no live triangle");
  }

  std::size_t hint_slot(Vec2 p) const {
    auto cell = [&](double u, double lo, double hi) {
      const double f = (u - lo) / (hi - lo);
      int c = static_cast<int>(std::floor(f * hint_res_));
      return std::clamp(c, 0, hint_res_ - 1);
    };
    return static_cast<std::size_t>(cell(p.y, lo_.y, hi_.y)) * hint_res_ +
           static_cast<std::size_t>(cell(p.x, lo_.x, hi_.x));
  }

  void set_hint(Vec2 p, Index v) { hints_[hint_slot(p)] = v; }

  Index new_vertex(Vec2 p, std::uint64_t key) {
    Index id;
    if (!free_vertices_.empty()) {
      id = free_vertices_.back();
      free_vertices_.pop_back();
      vertices_[id] = {p, key, kNone, true};
    } else {
      id = static_cast<Index>(vertices_.size());
      vertices_.push_back({p, key, kNone, true});
    }
    ++live_vertices_;
    return id;
  }

  Index new_triangle(std::array<Index, 3> v) {
    Index id;
    if (!free_triangles_.empty()) {
      id = free_triangles_.back();
      free_triangles_.pop_back();
    } else {
      id = static_cast<Index>(triangles_.size());
      triangles_.emplace_back();
      marks_.push_back(0);
    }
    triangles_[id] = {v, {kNone, kNone, kNone}, true};
    return id;
  }

  void free_triangle(Index t) {
    triangles_[t].alive = false;
    free_triangles_.push_back(t);
  }

  // Makes t's slot `slot` point at u, and u's matching edge point back at t.
  void set_neighbor(Index t, int slot, Index u) {
    triangles_[t].n[slot] = u;
    if (u == kNone) return;
    const Index a = triangles_[t].v[(slot + 1) % 3];
    const Index b = triangles_[t].v[(slot + 2) % 3];
    Triangle& ut = triangles_[u];
    for (int k = 0; k < 3; ++k) {
      if (ut.v[k] != a && ut.v[k] != b) {
        ut.n[k] = t;
        return;
      }
    }
  }

  void collect_cavity(Index start, Vec2 p) {
    if (marks_.size() < triangles_.size()) marks_.resize(triangles_.size(), 0);
    cavity_.clear();
    boundary_.clear();
    stack_.clear();
    stack_.push_back(start);
    marks_[start] = 1;
    while (!stack_.empty()) {
      const Index t = stack_.back();
      stack_.pop_back();
      cavity_.push_back(t);
      const Triangle& tr = triangles_[t];
      for (int i = 0; i < 3; ++i) {
        const Index u = tr.n[i];
        const Index a = tr.v[(i + 1) % 3];
        const Index b = tr.v[(i + 2) % 3];
        if (u == kNone) {
          boundary_.push_back({a, b, kNone});
          continue;
        }
        if (marks_[u] == 1) continue;
        if (marks_[u] == 2) {
          boundary_.push_back({a, b, u});
          continue;
        }
        const Triangle& ut = triangles_[u];
        if (incircle(vertices_[ut.v[0]].pos, vertices_[ut.v[1]].pos,
                     vertices_[ut.v[2]].pos, p) > 0) {
          marks_[u] = 1;
          stack_.push_back(u);
        } else {
          marks_[u] = 2;
          rejected_.push_back(u);
          boundary_.push_back({a, b, u});
        }
      }
    }
  }

  void clear_marks() {
    for (const Index t : cavity_) marks_[t] = 0;
    for (const Index t : rejected_) marks_[t] = 0;
    rejected_.clear();
  }

  // Fills the hole bounded by link_ (counter-clockwise) with its Delaunay
  // triangulation. outer_[j] lies across edge (link_[j], link_[j+1]).
  void fill_polygon() {
    poly_ = link_;
    edge_out_ = outer_;
    while (poly_.size() > 3) {
      const std::size_t k = poly_.size();
      std::size_t ear = k;
      for (std::size_t j = 0; j < k && ear == k; ++j) {
        const Index a = poly_[j], b = poly_[(j + 1) % k], c = poly_[(j + 2) % k];
        const Vec2 pa = vertices_[a].pos, pb = vertices_[b].pos, pc = vertices_[c].pos;
        if (orient(pa, pb, pc) <= 0) continue;
        bool empty = true;
        for (std::size_t m = 0; m < k && empty; ++m) {
          if (m == j || m == (j + 1) % k || m == (j + 2) % k) continue;
          if (incircle(pa, pb, pc, vertices_[poly_[m]].pos) > 0) empty = false;
          // A vertex on the closing diagonal also blocks the ear.
          else if (orient(pa, pc, vertices_[poly_[m]].pos) == 0 &&
                   on_segment(pa, pc, vertices_[poly_[m]].pos))
            empty = false;
        }
        if (empty) ear = j;
      }
      if (ear == k) throw std::logic_error("Delaunay::remove: no Delaunay ear found");
      const std::size_t j = ear;
      const Index a = poly_[j], b = poly_[(j + 1) % k], c = poly_[(j + 2) % k];
      const Index t = new_triangle({a, b, c});
      set_neighbor(t, 2, edge_out_[j]);            // edge (a, b)
      set_neighbor(t, 0, edge_out_[(j + 1) % k]);  // edge (b, c)
      vertices_[a].tri = t;
      vertices_[b].tri = t;
      vertices_[c].tri = t;
      last_tri_ = t;
      // Replace b and its two edges by the diagonal (a, c).
      edge_out_[j] = t;
      const std::size_t bj = (j + 1) % k;
      poly_.erase(poly_.begin() + static_cast<std::ptrdiff_t>(bj));
      edge_out_.erase(edge_out_.begin() + static_cast<std::ptrdiff_t>(bj));
    }
    const Index t = new_triangle({poly_[0], poly_[1], poly_[2]});
    set_neighbor(t, 2, edge_out_[0]);
    set_neighbor(t, 0, edge_out_[1]);
    set_neighbor(t, 1, edge_out_[2]);
    for (const Index v : poly_) vertices_[v].tri = t;
    last_tri_ = t;
  }

  static bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
  }

  Vec2 lo_, hi_;
  int hint_res_;
  std::vector<Vertex> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Index> free_vertices_;
  std::vector<Index> free_triangles_;
  std::vector<Index> hints_;
  std::size_t live_vertices_ = 0;
  Index last_tri_ = 0;

  // Scratch buffers reused across operations.
  std::vector<std::uint8_t> marks_{0};
  std::vector<Index> cavity_, rejected_, stack_, new_tris_;
  std::vector<BoundaryEdge> boundary_;
  std::vector<Index> link_, outer_, star_, poly_, edge_out_;
};

}  // namespace vpp::geometry
