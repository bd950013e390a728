// Built-in benchmark domains with their initial triangulations and reference
// eigenvalues. All initial triangles are right-isosceles, so the default
// constants C_P = 1/(sqrt(2) pi) and C_st,2 = sqrt(2) apply.
//
//   square      (0,1)^2, criss-cross: 4 triangles around the centre (0.5,0.5)
//   square2     (0,1)^2 cut along the diagonal (0,0)-(1,1): 2 triangles
//   lshape      (-1,1)^2 minus [0,1)x(-1,0]; the unit squares [-1,0]x[-1,0],
//               [-1,0]x[0,1], [0,1]x[0,1] each criss-crossed: 12 triangles, h_max = 1
//   isospectral Gordon-Webb-Wolpert drum built from 7 half-squares with legs 2:
//                 (0,0) (2,0) (0,2)        (0,0) (-2,0) (0,2)      (2,2) (2,0) (0,2)
//                 (0,0) (-2,0) (0,-2)      (-2,-2) (-2,0) (0,-2)
//                 (-2,-2) (-2,0) (-4,-2)   (-2,-2) (-2,-4) (0,-2)
//   dumbbell    (-3,2)x(-1,1) minus the slit (-3,-2]x{0} and the block
//               [-1,1]x[-3/4,1): 104 squares of side 1/4, each cut along the
//               diagonal of positive slope (208 triangles). The slit vertices
//               (-2.75,0), (-2.5,0), (-2.25,0) are doubled; the lower copies are
//               used by the triangles below the slit.
#pragma once

#include "hhoglb/mesh.hpp"

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace hhoglb {

struct DomainSpec {
  std::string name;
  std::vector<Vertex> vertices;
  std::vector<std::array<Index, 3>> triangles;
  /// Reference eigenvalues lambda(j) keyed by j.
  std::map<int, double> reference;
  std::string reference_source;

  Mesh mesh() const { return build_mesh(vertices, triangles); }
  std::optional<double> reference_eigenvalue(int j) const {
    auto it = reference.find(j);
    if (it == reference.end()) return std::nullopt;
    return it->second;
  }
};

namespace detail {

// Collects triangles by coordinates and merges coincident vertices unless the
// caller supplies a different tag for them.
class DomainBuilder {
 public:
  void add(std::array<Vec2, 3> pts, std::array<int, 3> tags = {0, 0, 0}) {
    std::array<Index, 3> t{};
    for (int k = 0; k < 3; ++k) t[k] = vertex(pts[k], tags[k]);
    triangles_.push_back(t);
  }
  void add_criss_cross(const Vec2& lo, double side) {
    const Vec2 c = lo + Vec2(0.5 * side, 0.5 * side);
    const Vec2 a = lo, b = lo + Vec2(side, 0), d = lo + Vec2(side, side), e = lo + Vec2(0, side);
    add({a, b, c});
    add({b, d, c});
    add({d, e, c});
    add({e, a, c});
  }
  DomainSpec finish(std::string name) const {
    DomainSpec d;
    d.name = std::move(name);
    d.vertices = vertices_;
    d.triangles = triangles_;
    return d;
  }

 private:
  Index vertex(const Vec2& x, int tag) {
    const auto key = std::make_tuple(std::llround(x(0) * 1e9), std::llround(x(1) * 1e9), tag);
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    const Index id = static_cast<Index>(vertices_.size());
    vertices_.push_back({x(0), x(1)});
    ids_.emplace(key, id);
    return id;
  }

  std::vector<Vertex> vertices_;
  std::vector<std::array<Index, 3>> triangles_;
  std::map<std::tuple<long long, long long, int>, Index> ids_;
};

}  // namespace detail

inline DomainSpec square_domain() {
  detail::DomainBuilder b;
  b.add_criss_cross(Vec2(0, 0), 1.0);
  DomainSpec d = b.finish("square");
  d.reference = {{1, 2.0 * std::numbers::pi * std::numbers::pi}};
  d.reference_source = "analytic, 2 pi^2";
  return d;
}

inline DomainSpec square2_domain() {
  detail::DomainBuilder b;
  b.add({Vec2(0, 0), Vec2(1, 0), Vec2(1, 1)});
  b.add({Vec2(0, 0), Vec2(1, 1), Vec2(0, 1)});
  DomainSpec d = b.finish("square2");
  d.reference = {{1, 2.0 * std::numbers::pi * std::numbers::pi}};
  d.reference_source = "analytic, 2 pi^2";
  return d;
}

inline DomainSpec lshape_domain() {
  detail::DomainBuilder b;
  b.add_criss_cross(Vec2(-1, -1), 1.0);
  b.add_criss_cross(Vec2(-1, 0), 1.0);
  b.add_criss_cross(Vec2(0, 0), 1.0);
  DomainSpec d = b.finish("lshape");
  d.reference = {{1, 9.6397238440219410}};
  d.reference_source = "Betcke and Trefethen (2005)";
  return d;
}

inline DomainSpec isospectral_domain() {
  detail::DomainBuilder b;
  auto v = [](double x, double y) { return Vec2(x, y); };
  b.add({v(0, 0), v(2, 0), v(0, 2)});
  b.add({v(0, 0), v(-2, 0), v(0, 2)});
  b.add({v(2, 2), v(2, 0), v(0, 2)});
  b.add({v(0, 0), v(-2, 0), v(0, -2)});
  b.add({v(-2, -2), v(-2, 0), v(0, -2)});
  b.add({v(-2, -2), v(-2, 0), v(-4, -2)});
  b.add({v(-2, -2), v(-2, -4), v(0, -2)});
  DomainSpec d = b.finish("isospectral");
  d.reference = {{1, 2.53794399980}, {25, 29.5697729132}};
  d.reference_source = "Driscoll (1997)";
  return d;
}

inline DomainSpec dumbbell_domain() {
  detail::DomainBuilder b;
  const double s = 0.25;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 8; ++j) {
      const double x0 = -3.0 + i * s, y0 = -1.0 + j * s;
      if (x0 >= -1.0 && x0 + s <= 1.0 && y0 >= -0.75) continue;
      const Vec2 a(x0, y0), c(x0 + s, y0), d(x0 + s, y0 + s), e(x0, y0 + s);
      // triangles below the slit use the lower copies of the interior slit vertices
      const bool below = (y0 + s <= 0.0 && y0 + s > -1e-12) && x0 < -2.0;
      auto tag = [&](const Vec2& p) {
        const bool on_slit = std::abs(p(1)) < 1e-12 && p(0) > -3.0 + 1e-12 && p(0) < -2.0 - 1e-12;
        return (below && on_slit) ? 1 : 0;
      };
      b.add({a, c, d}, {tag(a), tag(c), tag(d)});
      b.add({a, d, e}, {tag(a), tag(d), tag(e)});
    }
  }
  DomainSpec dom = b.finish("dumbbell");
  dom.reference = {{1, 8.367702430882}};
  dom.reference_source = "adaptive computation with p = 5 (numerical reference)";
  return dom;
}

inline std::vector<std::string> domain_names() {
  return {"square", "square2", "lshape", "isospectral", "dumbbell"};
}

inline DomainSpec domain_by_name(const std::string& name) {
  if (name == "square") return square_domain();
  if (name == "square2") return square2_domain();
  if (name == "lshape") return lshape_domain();
  if (name == "isospectral") return isospectral_domain();
  if (name == "dumbbell" || name == "dumbbell-slit") return dumbbell_domain();
  throw std::invalid_argument("unknown domain '" + name + "'");
}

}  // namespace hhoglb
