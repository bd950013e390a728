#include "support.hpp"

#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

using namespace hhoglb;

namespace {

Mesh single_triangle() { return build_mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}); }

// Brute-force conformity: no vertex lies strictly inside an edge and every
// edge has one or two neighbours.
void expect_conforming(const Mesh& m) {
  for (const Edge& e : m.edges()) {
    const Vec2 a = m.point(e.v[0]), b = m.point(e.v[1]);
    for (Index z = 0; z < m.num_vertices(); ++z) {
      if (z == e.v[0] || z == e.v[1]) continue;
      const Vec2 x = m.point(z);
      const double s = (x - a).dot(b - a) / (b - a).squaredNorm();
      if (s <= 1e-12 || s >= 1 - 1e-12) continue;
      ASSERT_GT((a + s * (b - a) - x).norm(), 1e-10 * e.length) << "hanging vertex " << z;
    }
    EXPECT_EQ(e.is_boundary, e.triangles[1] == -1);
  }
}

// Similarity class of a triangle: sorted side lengths scaled by the longest.
std::array<long, 2> shape_key(const Mesh& m, const Triangle& t) {
  std::array<double, 3> s{};
  for (int k = 0; k < 3; ++k) s[k] = (m.point(t.v[k]) - m.point(t.v[(k + 1) % 3])).norm();
  std::sort(s.begin(), s.end());
  return {std::lround(1e8 * s[0] / s[2]), std::lround(1e8 * s[1] / s[2])};
}

}  // namespace

TEST(Mesh, SingleTriangle) {
  const Mesh m = single_triangle();
  EXPECT_EQ(m.num_vertices(), 3);
  EXPECT_EQ(m.num_triangles(), 1);
  EXPECT_EQ(m.num_boundary_edges(), 3);
  EXPECT_EQ(m.num_interior_edges(), 0);
  EXPECT_NEAR(m.h_max(), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(m.total_area(), 0.5, 1e-15);
  // the hypotenuse is the refinement edge
  const Triangle& t = m.triangles()[0];
  const Vec2 d = m.point(t.v[t.refinement_edge]) - m.point(t.v[(t.refinement_edge + 1) % 3]);
  EXPECT_NEAR(d.norm(), std::sqrt(2.0), 1e-15);
}

TEST(Mesh, TwoTriangleSquare) {
  const Mesh m = square2_domain().mesh();
  EXPECT_EQ(m.num_interior_edges(), 1);
  EXPECT_EQ(m.num_boundary_edges(), 4);
  EXPECT_NEAR(m.h_max(), std::sqrt(2.0), 1e-15);
  const Mesh r = uniform_refine(m);
  EXPECT_NEAR(r.h_max(), std::sqrt(2.0) / 2.0, 1e-15);
}

TEST(Mesh, BuiltInDomains) {
  const Mesh sq = square_domain().mesh();
  EXPECT_EQ(sq.num_triangles(), 4);
  EXPECT_NEAR(sq.h_max(), 1.0, 1e-15);
  EXPECT_NEAR(uniform_refine(sq).h_max(), 0.5, 1e-15);

  const Mesh l = lshape_domain().mesh();
  EXPECT_EQ(l.num_triangles(), 12);
  EXPECT_NEAR(l.total_area(), 3.0, 1e-14);
  EXPECT_NEAR(min_angle(l), std::numbers::pi / 4, 1e-14);

  const Mesh iso = isospectral_domain().mesh();
  EXPECT_EQ(iso.num_triangles(), 7);
  EXPECT_NEAR(iso.total_area(), 14.0, 1e-13);

  const Mesh db = dumbbell_domain().mesh();
  EXPECT_EQ(db.num_triangles(), 208);
  EXPECT_NEAR(db.total_area(), 208.0 / 32.0, 1e-12);

  for (const auto& name : domain_names()) {
    const Mesh m = domain_by_name(name).mesh();
    expect_conforming(m);
    for (Index t = 0; t < m.num_triangles(); ++t) EXPECT_GT(m.area(t), 0.0);
  }
  EXPECT_THROW(domain_by_name("nowhere"), std::invalid_argument);
}

TEST(Mesh, DumbbellSlitIsCut) {
  // vertices on the slit are doubled, so the slit edges are boundary edges
  const Mesh db = dumbbell_domain().mesh();
  std::map<std::pair<long, long>, int> count;
  for (const Vertex& v : db.vertices()) ++count[{std::lround(v.x * 1e6), std::lround(v.y * 1e6)}];
  int doubled = 0;
  for (const auto& kv : count) doubled += kv.second > 1;
  EXPECT_GT(doubled, 0);
}

TEST(Mesh, InteriorEdgesHaveOpposedOrientation) {
  const Mesh m = uniform_refine(lshape_domain().mesh());
  for (Index ei = 0; ei < m.num_edges(); ++ei) {
    const Edge& e = m.edges()[ei];
    const Vec2 mid = 0.5 * (m.point(e.v[0]) + m.point(e.v[1]));
    EXPECT_LT(e.normal.dot(m.frame(e.triangles[0]).centroid() - mid), 0.0);
    if (e.is_boundary) continue;
    EXPECT_GT(e.normal.dot(m.frame(e.triangles[1]).centroid() - mid), 0.0);
    // each neighbour traverses the edge in the opposite direction
    int dir[2] = {0, 0};
    for (int s = 0; s < 2; ++s) {
      const Triangle& t = m.triangles()[e.triangles[s]];
      for (int k = 0; k < 3; ++k)
        if (m.triangle_edge(e.triangles[s], k) == ei) dir[s] = t.v[k] == e.v[0] ? 1 : -1;
    }
    EXPECT_EQ(dir[0], -dir[1]);
  }
}

TEST(Mesh, OrientsClockwiseInput) {
  const Mesh m = build_mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 2, 1}});
  const Triangle& t = m.triangles()[0];
  EXPECT_GT(detail::signed_area(m.point(t.v[0]), m.point(t.v[1]), m.point(t.v[2])), 0.0);
}

TEST(Mesh, RejectsInvalidInput) {
  EXPECT_THROW(build_mesh({{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 2}}), MeshError);
  EXPECT_THROW(build_mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}, {0, 1, 2}}), MeshError);
  EXPECT_THROW(build_mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 5}}), MeshError);
  EXPECT_THROW(build_mesh({{0, 0}, {1, 0}, {0, 1}, {0, -1}, {1, 1}}, {{0, 1, 2}, {0, 3, 1}, {0, 1, 4}}),
               MeshError);
  // (0.5, 0.5) hangs on the diagonal of the left triangle
  EXPECT_THROW(build_mesh({{0, 0}, {1, 0}, {0, 1}, {0.5, 0.5}, {1, 1}}, {{0, 1, 2}, {1, 4, 3}, {3, 4, 2}}),
               MeshError);
}

TEST(Refinement, UniformCounts) {
  const Mesh m0 = lshape_domain().mesh();
  const Mesh m1 = uniform_refine(m0);
  const Mesh m2 = uniform_refine(m1);
  EXPECT_EQ(m1.num_triangles(), 4 * m0.num_triangles());
  EXPECT_EQ(m2.num_triangles(), 16 * m0.num_triangles());
  EXPECT_NEAR(m2.total_area(), m0.total_area(), 1e-13);
  expect_conforming(m2);
}

TEST(Refinement, EmptyMarkingIsIdentity) {
  const Mesh m = lshape_domain().mesh();
  const Mesh r = bisect(m, {});
  ASSERT_EQ(r.num_triangles(), m.num_triangles());
  ASSERT_EQ(r.num_vertices(), m.num_vertices());
  for (Index t = 0; t < m.num_triangles(); ++t) EXPECT_EQ(r.triangles()[t].v, m.triangles()[t].v);
}

TEST(Refinement, ClosureKeepsConformity) {
  // marking one half of the two-triangle square bisects the shared diagonal,
  // so the neighbour is bisected as well
  const Mesh m = bisect(square2_domain().mesh(), {0});
  EXPECT_EQ(m.num_triangles(), 4);
  expect_conforming(m);

  std::mt19937 rng(7);
  Mesh r = lshape_domain().mesh();
  for (int it = 0; it < 12; ++it) {
    std::vector<Index> marked;
    std::uniform_int_distribution<Index> pick(0, r.num_triangles() - 1);
    for (int k = 0; k < 3; ++k) marked.push_back(pick(rng));
    const Mesh next = bisect(r, marked);
    EXPECT_GT(next.num_triangles(), r.num_triangles());
    EXPECT_NEAR(next.total_area(), 3.0, 1e-12);
    r = next;
  }
  expect_conforming(r);
  EXPECT_THROW(bisect(r, {r.num_triangles()}), std::out_of_range);
}

TEST(Refinement, ShapeRegularUnderCornerRefinement) {
  // repeated refinement towards the re-entrant corner of the L-shape
  Mesh m = lshape_domain().mesh();
  const double initial = min_angle(m);
  std::set<std::array<long, 2>> shapes;
  for (int round = 0; round < 20; ++round) {
    std::vector<Index> marked;
    for (Index t = 0; t < m.num_triangles(); ++t)
      for (Index v : m.triangles()[t].v)
        if (m.point(v).norm() < 1e-12) marked.push_back(t);
    m = bisect(m, marked);
    EXPECT_GE(min_angle(m), initial - 1e-12);
  }
  for (const Triangle& t : m.triangles()) shapes.insert(shape_key(m, t));
  EXPECT_LE(shapes.size(), 4u);
  expect_conforming(m);
  // the smallest triangles have shrunk geometrically
  double smallest = 1.0;
  for (Index t = 0; t < m.num_triangles(); ++t) smallest = std::min(smallest, m.area(t));
  EXPECT_LT(smallest, 1e-5);
}

TEST(MeshIO, RoundTrip) {
  const Mesh m = bisect(lshape_domain().mesh(), {0, 5});
  std::stringstream ss;
  write_mesh(ss, m);
  const Mesh r = read_mesh(ss);
  ASSERT_EQ(r.num_vertices(), m.num_vertices());
  ASSERT_EQ(r.num_triangles(), m.num_triangles());
  for (Index v = 0; v < m.num_vertices(); ++v) EXPECT_EQ(r.point(v), m.point(v));
  EXPECT_NEAR(r.total_area(), m.total_area(), 1e-14);
}

TEST(MeshIO, OneLineHeaderAndTags) {
  std::istringstream in("vertices 4 / triangles 2\n0 0\n1 0\n1 1\n0 1\n0 1 2 7\n0 2 3 7\n");
  const Mesh m = read_mesh(in);
  EXPECT_EQ(m.num_triangles(), 2);
  EXPECT_EQ(m.num_interior_edges(), 1);
  std::istringstream bad("vertices 4\ntriangles 2\n0 0\n1 0\n1 1\n0 1\n0 1 2\n");
  EXPECT_THROW(read_mesh(bad), MeshError);
  std::istringstream junk("points 3\n");
  EXPECT_THROW(read_mesh(junk), MeshError);
}
