// Conforming triangulations with oriented edges, newest-vertex bisection with
// closure, and the plain-text mesh format.
//
// Local edge k of a triangle joins vertex k and vertex (k+1) mod 3. The
// refinement edge is stored as such a local index; bisection inserts the
// midpoint of that edge as the newest vertex, and each child inherits one of the
// two remaining parent edges as its refinement edge.
#pragma once

#include "hhoglb/basis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace hhoglb {

using Index = std::int64_t;

struct Vertex {
  double x = 0.0;
  double y = 0.0;
  Vec2 vec() const { return Vec2(x, y); }
};

struct Triangle {
  std::array<Index, 3> v{};
  int refinement_edge = 0;
  int generation = 0;
};

struct Edge {
  /// Endpoints with v[0] < v[1]; face bases are parametrised from v[0] to v[1].
  std::array<Index, 2> v{};
  /// Adjacent triangles, ascending; triangles[1] == -1 on the boundary.
  std::array<Index, 2> triangles{-1, -1};
  /// Unit normal, outward for triangles[0].
  Vec2 normal = Vec2::Zero();
  bool is_boundary = true;
  double length = 0.0;
};

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::uint64_t edge_key(Index a, Index b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

inline double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b(0) - a(0)) * (c(1) - a(1)) - (b(1) - a(1)) * (c(0) - a(0)));
}

}  // namespace detail

/// Immutable conforming triangulation.
class Mesh {
 public:
  Mesh() = default;

  /// Builds edges and adjacency from triangles whose refinement edges are set.
  /// Triangles are reoriented counter-clockwise if needed.
  Mesh(std::vector<Vertex> vertices, std::vector<Triangle> triangles, bool check_hanging_nodes)
      : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
    for (const Vertex& v : vertices_)
      if (!std::isfinite(v.x) || !std::isfinite(v.y))
        throw MeshError("mesh: non-finite vertex coordinate");
    orient_and_validate();
    build_edges();
    if (check_hanging_nodes) check_hanging();
    compute_h_max();
  }

  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Edge>& edges() const { return edges_; }
  Index num_vertices() const { return static_cast<Index>(vertices_.size()); }
  Index num_triangles() const { return static_cast<Index>(triangles_.size()); }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }
  Index num_interior_edges() const { return num_interior_edges_; }
  Index num_boundary_edges() const { return num_edges() - num_interior_edges_; }

  /// Global edge of local edge k of triangle t.
  Index triangle_edge(Index t, int k) const { return tri_edges_[t][k]; }
  const std::array<Index, 3>& triangle_edges(Index t) const { return tri_edges_[t]; }

  /// Outward unit normal of triangle t on its local edge k.
  Vec2 outward_normal(Index t, int k) const {
    const Edge& e = edges_[tri_edges_[t][k]];
    return e.triangles[0] == t ? e.normal : Vec2(-e.normal);
  }

  Vec2 point(Index v) const { return vertices_[v].vec(); }
  CellFrame frame(Index t) const {
    const auto& tv = triangles_[t].v;
    return CellFrame(point(tv[0]), point(tv[1]), point(tv[2]));
  }
  double area(Index t) const {
    const auto& tv = triangles_[t].v;
    return detail::signed_area(point(tv[0]), point(tv[1]), point(tv[2]));
  }
  double diameter(Index t) const {
    const auto& tv = triangles_[t].v;
    const Vec2 a = point(tv[0]), b = point(tv[1]), c = point(tv[2]);
    return std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
  }
  double h_max() const { return h_max_; }

  double total_area() const {
    double s = 0.0;
    for (Index t = 0; t < num_triangles(); ++t) s += area(t);
    return s;
  }

  /// Vertices not on any boundary edge.
  std::vector<bool> interior_vertex_mask() const {
    std::vector<bool> interior(vertices_.size(), true);
    for (const Edge& e : edges_)
      if (e.is_boundary) interior[e.v[0]] = interior[e.v[1]] = false;
    return interior;
  }

 private:
  void orient_and_validate() {
    std::unordered_set<std::string> seen;
    for (Triangle& t : triangles_) {
      for (Index id : t.v)
        if (id < 0 || id >= num_vertices()) throw MeshError("mesh: vertex index out of range");
      if (t.v[0] == t.v[1] || t.v[1] == t.v[2] || t.v[0] == t.v[2])
        throw MeshError("mesh: triangle with repeated vertex");
      const double a = detail::signed_area(point(t.v[0]), point(t.v[1]), point(t.v[2]));
      const double scale = std::max({(point(t.v[1]) - point(t.v[0])).squaredNorm(),
                                     (point(t.v[2]) - point(t.v[0])).squaredNorm(),
                                     (point(t.v[2]) - point(t.v[1])).squaredNorm()});
      if (!(std::abs(a) > 1e-14 * scale)) throw MeshError("mesh: degenerate triangle (zero area)");
      if (a < 0.0) {
        // swapping v1 and v2 reverses orientation; local edges 0 and 2 swap roles
        const Index a0 = t.v[0], a1 = t.v[1], a2 = t.v[2];
        const int r = t.refinement_edge;
        t.v = {a0, a2, a1};
        // old edge 0 (a0,a1) -> new edge 2 (a1,a0); old 1 (a1,a2) -> new 1; old 2 (a2,a0) -> new 0
        t.refinement_edge = (r == 0) ? 2 : (r == 2 ? 0 : 1);
      }
      std::array<Index, 3> s = t.v;
      std::sort(s.begin(), s.end());
      const std::string key =
          std::to_string(s[0]) + ":" + std::to_string(s[1]) + ":" + std::to_string(s[2]);
      if (!seen.insert(key).second) throw MeshError("mesh: duplicate triangle");
    }
  }

  void build_edges() {
    std::unordered_map<std::uint64_t, Index> index;
    index.reserve(3 * triangles_.size());
    tri_edges_.assign(triangles_.size(), {-1, -1, -1});
    for (Index t = 0; t < num_triangles(); ++t) {
      const auto& tv = triangles_[t].v;
      for (int k = 0; k < 3; ++k) {
        const Index a = tv[k], b = tv[(k + 1) % 3];
        const auto key = detail::edge_key(a, b);
        auto [it, inserted] = index.emplace(key, num_edges());
        if (inserted) {
          Edge e;
          e.v = {std::min(a, b), std::max(a, b)};
          e.triangles = {t, -1};
          const Vec2 d = point(b) - point(a);
          e.length = d.norm();
          e.normal = Vec2(d(1), -d(0)) / e.length;
          edges_.push_back(e);
        } else {
          Edge& e = edges_[it->second];
          if (e.triangles[1] != -1) throw MeshError("mesh: edge shared by more than two triangles");
          // both triangles are counter-clockwise, so a conforming neighbour
          // traverses the edge in the opposite direction
          const auto& first = triangles_[e.triangles[0]].v;
          for (int j = 0; j < 3; ++j)
            if (first[j] == a && first[(j + 1) % 3] == b)
              throw MeshError("mesh: inconsistent orientation across an edge");
          e.triangles[1] = t;
        }
        tri_edges_[t][k] = it->second;
      }
    }
    num_interior_edges_ = 0;
    for (Edge& e : edges_) {
      e.is_boundary = (e.triangles[1] == -1);
      if (!e.is_boundary) ++num_interior_edges_;
    }
  }

  // A hanging node is a vertex strictly inside an edge that only one triangle uses.
  void check_hanging() const {
    std::vector<Index> order(vertices_.size());
    for (Index i = 0; i < num_vertices(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](Index a, Index b) { return vertices_[a].x < vertices_[b].x; });
    std::vector<double> xs(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) xs[i] = vertices_[order[i]].x;
    for (const Edge& e : edges_) {
      if (!e.is_boundary) continue;
      const Vec2 a = point(e.v[0]), b = point(e.v[1]);
      const double tol = 1e-12 * e.length;
      const double lo = std::min(a(0), b(0)) - tol, hi = std::max(a(0), b(0)) + tol;
      auto it = std::lower_bound(xs.begin(), xs.end(), lo);
      for (; it != xs.end() && *it <= hi; ++it) {
        const Index v = order[it - xs.begin()];
        if (v == e.v[0] || v == e.v[1]) continue;
        const Vec2 x = point(v);
        const Vec2 d = b - a;
        const double s = (x - a).dot(d) / d.squaredNorm();
        if (s <= 1e-12 || s >= 1.0 - 1e-12) continue;
        if ((a + s * d - x).norm() <= tol) throw MeshError("mesh: hanging node (non-conforming input)");
      }
    }
  }

  void compute_h_max() {
    h_max_ = 0.0;
    for (Index t = 0; t < num_triangles(); ++t) h_max_ = std::max(h_max_, diameter(t));
  }

  std::vector<Vertex> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<Index, 3>> tri_edges_;
  Index num_interior_edges_ = 0;
  double h_max_ = 0.0;
};

/// Builds a mesh from vertex coordinates and vertex-index triples. The longest
/// edge of every input triangle becomes its refinement edge.
inline Mesh build_mesh(const std::vector<Vertex>& vertices,
                       const std::vector<std::array<Index, 3>>& triangles) {
  std::vector<Triangle> tris;
  tris.reserve(triangles.size());
  for (const auto& tv : triangles) {
    Triangle t;
    t.v = tv;
    double longest = -1.0;
    for (int k = 0; k < 3; ++k) {
      const Index a = tv[k], b = tv[(k + 1) % 3];
      if (a < 0 || b < 0 || a >= static_cast<Index>(vertices.size()) ||
          b >= static_cast<Index>(vertices.size()))
        throw MeshError("mesh: vertex index out of range");
      const double len = (vertices[a].vec() - vertices[b].vec()).norm();
      if (len > longest * (1.0 + 1e-12)) {
        longest = len;
        t.refinement_edge = k;
      }
    }
    tris.push_back(t);
  }
  return Mesh(vertices, std::move(tris), true);
}

namespace detail {

// Refines every edge in `marked` after closing the set under "a triangle with a
// marked edge has its refinement edge marked".
inline Mesh refine_marked_edges(const Mesh& mesh, std::unordered_set<std::uint64_t> marked) {
  const auto& tris = mesh.triangles();
  auto ref_key = [&](Index t) {
    const Triangle& tr = tris[t];
    return edge_key(tr.v[tr.refinement_edge], tr.v[(tr.refinement_edge + 1) % 3]);
  };
  std::vector<Index> work;
  for (Index t = 0; t < mesh.num_triangles(); ++t) work.push_back(t);
  while (!work.empty()) {
    const Index t = work.back();
    work.pop_back();
    const Triangle& tr = tris[t];
    bool any = false;
    for (int k = 0; k < 3; ++k)
      any = any || marked.count(edge_key(tr.v[k], tr.v[(k + 1) % 3])) > 0;
    if (!any) continue;
    const std::uint64_t rk = ref_key(t);
    if (marked.insert(rk).second) {
      const Edge& e = mesh.edges()[mesh.triangle_edge(t, tr.refinement_edge)];
      for (Index nb : e.triangles)
        if (nb >= 0 && nb != t) work.push_back(nb);
    }
  }

  std::vector<Vertex> vertices = mesh.vertices();
  std::unordered_map<std::uint64_t, Index> midpoint;
  std::vector<Triangle> out;
  out.reserve(tris.size() * 2);

  auto mid = [&](Index a, Index b) {
    const auto key = edge_key(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const Index id = static_cast<Index>(vertices.size());
    vertices.push_back({0.5 * (vertices[a].x + vertices[b].x), 0.5 * (vertices[a].y + vertices[b].y)});
    midpoint.emplace(key, id);
    return id;
  };

  std::vector<Triangle> stack;
  for (const Triangle& t : tris) {
    stack.push_back(t);
    while (!stack.empty()) {
      const Triangle cur = stack.back();
      stack.pop_back();
      const int r = cur.refinement_edge;
      const Index a = cur.v[r], b = cur.v[(r + 1) % 3], c = cur.v[(r + 2) % 3];
      if (!marked.count(edge_key(a, b))) {
        out.push_back(cur);
        continue;
      }
      const Index m = mid(a, b);
      Triangle left{{c, a, m}, 0, cur.generation + 1};
      Triangle right{{b, c, m}, 0, cur.generation + 1};
      stack.push_back(right);
      stack.push_back(left);
    }
  }
  return Mesh(std::move(vertices), std::move(out), false);
}

}  // namespace detail

/// Newest-vertex bisection of the marked triangles plus the minimal closure
/// that restores conformity.
inline Mesh bisect(const Mesh& mesh, const std::vector<Index>& marked) {
  std::unordered_set<std::uint64_t> edges;
  for (Index t : marked) {
    if (t < 0 || t >= mesh.num_triangles()) throw std::out_of_range("bisect: triangle index");
    const Triangle& tr = mesh.triangles()[t];
    edges.insert(detail::edge_key(tr.v[tr.refinement_edge], tr.v[(tr.refinement_edge + 1) % 3]));
  }
  if (edges.empty()) return mesh;
  return detail::refine_marked_edges(mesh, std::move(edges));
}

/// Bisects every edge: each triangle is replaced by four children.
inline Mesh uniform_refine(const Mesh& mesh) {
  std::unordered_set<std::uint64_t> edges;
  for (const Edge& e : mesh.edges()) edges.insert(detail::edge_key(e.v[0], e.v[1]));
  return detail::refine_marked_edges(mesh, std::move(edges));
}

/// Smallest interior angle (radians) over all triangles.
inline double min_angle(const Mesh& mesh) {
  double best = std::numbers::pi;
  for (const Triangle& t : mesh.triangles()) {
    for (int k = 0; k < 3; ++k) {
      const Vec2 o = mesh.point(t.v[k]);
      const Vec2 u = mesh.point(t.v[(k + 1) % 3]) - o, w = mesh.point(t.v[(k + 2) % 3]) - o;
      best = std::min(best, std::acos(std::clamp(u.dot(w) / (u.norm() * w.norm()), -1.0, 1.0)));
    }
  }
  return best;
}

// Plain-text format:
//   vertices N
//   triangles M
//   N lines "x y"
//   M lines "i j k [boundary-tag]"   (0-based; the tag is carried but unused)
// The reader also accepts the counts on one line, "vertices N / triangles M".

inline void write_mesh(std::ostream& os, const Mesh& mesh) {
  os.precision(17);
  os << "vertices " << mesh.num_vertices() << "\ntriangles " << mesh.num_triangles() << "\n";
  for (const Vertex& v : mesh.vertices()) os << v.x << " " << v.y << "\n";
  for (const Triangle& t : mesh.triangles()) os << t.v[0] << " " << t.v[1] << " " << t.v[2] << "\n";
}

inline Mesh read_mesh(std::istream& is) {
  std::string word;
  long long nv = -1, nt = -1;
  while (is >> word && (nv < 0 || nt < 0)) {
    if (word == "vertices") is >> nv;
    else if (word == "triangles") is >> nt;
    else if (word == "/") continue;
    else throw MeshError("mesh file: unexpected token '" + word + "' in header");
    if (!is) throw MeshError("mesh file: malformed header");
    if (nv >= 0 && nt >= 0) break;
  }
  if (nv < 0 || nt < 0) throw MeshError("mesh file: missing header");
  std::vector<Vertex> vertices(nv);
  for (auto& v : vertices)
    if (!(is >> v.x >> v.y)) throw MeshError("mesh file: truncated vertex list");
  std::string line;
  std::getline(is, line);
  std::vector<std::array<Index, 3>> triangles;
  while (static_cast<long long>(triangles.size()) < nt && std::getline(is, line)) {
    std::istringstream ls(line);
    std::array<Index, 3> t{};
    if (!(ls >> t[0])) continue;
    if (!(ls >> t[1] >> t[2])) throw MeshError("mesh file: malformed triangle line");
    triangles.push_back(t);
  }
  if (static_cast<long long>(triangles.size()) != nt) throw MeshError("mesh file: truncated triangle list");
  return build_mesh(vertices, triangles);
}

}  // namespace hhoglb
