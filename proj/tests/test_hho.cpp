#include "support.hpp"

#include <gtest/gtest.h>

using namespace hhoglb;
using testing_support::RandomPolynomial;
using testing_support::random_triangle;

namespace {

LocalGeometry geometry(const std::array<Vec2, 3>& T, std::array<bool, 3> rev = {}) {
  return LocalGeometry(T[0], T[1], T[2], rev);
}

double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace

TEST(Params, DefaultsAndValidation) {
  const Params prm = Params::make();
  EXPECT_NEAR(prm.sigma2_sq(), 1.0 / (std::numbers::pi * std::numbers::pi), 1e-16);
  EXPECT_NEAR(prm.beta, 0.5 * std::numbers::pi * std::numbers::pi, 1e-13);
  EXPECT_TRUE(prm.beta_admissible());
  EXPECT_THROW(Params::make(0.0), std::invalid_argument);
  EXPECT_THROW(Params::make(1.0), std::invalid_argument);
  EXPECT_THROW(Params::make(0.5, 0.2, 1.4, 100.0), std::invalid_argument);
  EXPECT_NO_THROW(Params::make(0.5, 0.2, 1.4, 1.0));
}

TEST(LocalOperators, Sizes) {
  const auto T = std::array<Vec2, 3>{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  for (int p = 0; p <= 4; ++p) {
    const LocalOperators op = local_operators(geometry(T), p, Params::make());
    EXPECT_EQ(op.R.rows(), dim_poly(p + 1));
    EXPECT_EQ(op.R.cols(), dim_poly(p + 1) + 3 * (p + 1));
    EXPECT_EQ(op.G.rows(), (p + 1) * (p + 3));
    EXPECT_EQ(op.A.rows(), op.local_size());
    EXPECT_TRUE(op.B.isApprox(Eigen::MatrixXd::Identity(dim_poly(p + 1), dim_poly(p + 1))));
  }
}

TEST(LocalOperators, CommutingDiagramOnRandomPolynomials) {
  std::mt19937 rng(11);
  const Params prm = Params::make();
  for (int it = 0; it < 200; ++it) {
    const int p = it % 4;
    const auto T = random_triangle(rng);
    std::array<bool, 3> rev{bool(rng() % 2), bool(rng() % 2), bool(rng() % 2)};
    const LocalGeometry g = geometry(T, rev);
    const RandomPolynomial v(rng, p + 3);
    const ScalarField vs = [&](const Vec2& x) { return v(x); };
    const VectorField vg = [&](const Vec2& x) { return v.grad(x); };
    const LocalOperators op = local_operators(g, p, prm);
    const Eigen::VectorXd Iv = interpolate_local(vs, g, p);
    const Eigen::VectorXd galerkin = galerkin_project(vs, vg, g.cell, p + 1);
    const Eigen::VectorXd rt = l2_project_rt(vg, g.cell, p, 2 * p + 10);
    EXPECT_LT((op.R * Iv - galerkin).norm(), 1e-9) << it;
    EXPECT_LT((op.G * Iv - rt).norm(), 1e-9) << it;
  }
}

TEST(LocalOperators, ReconstructionOfConstantsAndAffines) {
  const auto T = std::array<Vec2, 3>{Vec2(0.2, 0.1), Vec2(1.3, 0.4), Vec2(0.5, 1.2)};
  const LocalGeometry g = geometry(T, {true, false, true});
  for (int p = 0; p <= 3; ++p) {
    const LocalOperators op = local_operators(g, p, Params::make());
    const Eigen::VectorXd c = interpolate_local([](const Vec2&) { return 3.0; }, g, p);
    EXPECT_LT((op.G * c).norm(), 1e-12);
    EXPECT_NEAR((op.R * c)(0), 3.0 * std::sqrt(g.cell.area()), 1e-12);
    EXPECT_LT((op.R * c).tail(op.cell_size() - 1).norm(), 1e-12);
    EXPECT_LT((op.S * c).norm(), 1e-12);
    // affine: S vanishes and a(Iv, Iv) = |grad v|^2 |T|
    const ScalarField aff = [](const Vec2& x) { return 1.0 + 2.0 * x(0) - 0.5 * x(1); };
    const Eigen::VectorXd ia = interpolate_local(aff, g, p);
    EXPECT_LT((op.S * ia).norm(), 1e-12);
    EXPECT_NEAR(ia.dot(op.A * ia), (4.0 + 0.25) * g.cell.area(), 1e-11);
  }
}

TEST(LocalOperators, BubbleGradientByParts) {
  // v = (v_T, 0): (G v, tau) = (grad v_T, tau) - <v_T, tau.n> = -(v_T, div tau)
  std::mt19937 rng(12);
  for (int p = 0; p <= 3; ++p) {
    const auto T = random_triangle(rng);
    const LocalGeometry g = geometry(T);
    const LocalOperators op = local_operators(g, p, Params::make());
    const CellBasis cb(g.cell, p + 1);
    const RTBasis rt(g.cell, p);
    for (int i = 0; i < op.cell_size(); ++i) {
      Eigen::VectorXd oracle = Eigen::VectorXd::Zero(op.rt_size());
      Mat2X val;
      Eigen::VectorXd div;
      const double area2 = 2 * g.cell.area();
      // tensor Gauss on the collapsed square
      const GaussRule1D& gl = gauss_legendre(2 * p + 6);
      for (std::size_t a = 0; a < gl.nodes.size(); ++a)
        for (std::size_t b = 0; b < gl.nodes.size(); ++b) {
          const double s = 0.5 * (gl.nodes[a] + 1), t = 0.5 * (gl.nodes[b] + 1);
          const Vec2 x = T[0] + s * (T[1] - T[0]) + (1 - s) * t * (T[2] - T[0]);
          const double w = 0.25 * gl.weights[a] * gl.weights[b] * (1 - s) * area2;
          rt.evaluate(x, val, div);
          oracle -= w * cb.values(x)(i) * div;
        }
      EXPECT_LT((op.G.col(i) - oracle).norm(), 1e-11) << p << " " << i;
    }
  }
}

TEST(LocalOperators, FormsAgreeAndArePositive) {
  std::mt19937 rng(13);
  for (int it = 0; it < 20; ++it) {
    const int p = it % 5;
    const auto T = random_triangle(rng, 0.2);
    const Params prm = Params::make(0.1 + 0.8 * (it % 7) / 6.0);
    const LocalOperators op = local_operators(geometry(T), p, prm);
    const Eigen::MatrixXd A5 = local_form_difference(op, prm), A24 = local_form_weighted(op, prm);
    EXPECT_LT(rel_diff(A5, A24), 1e-12);
    EXPECT_LT(rel_diff(op.A, op.A.transpose()), 1e-14);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.A);
    EXPECT_GT(es.eigenvalues()(0), -1e-12 * es.eigenvalues().maxCoeff());
    // the kernel is exactly the constants
    EXPECT_GT(es.eigenvalues()(1), 1e-8 * es.eigenvalues().maxCoeff());
  }
}

TEST(LocalOperators, AffineInvariance) {
  const std::array<Vec2, 3> T{Vec2(0, 0), Vec2(1, 0.1), Vec2(0.3, 0.8)};
  const double c = std::cos(0.7), s = std::sin(0.7);
  Eigen::Matrix2d Q;
  Q << c, -s, s, c;
  std::array<Vec2, 3> M;
  for (int k = 0; k < 3; ++k) M[k] = Q * T[k] + Vec2(5, -3);
  const Params prm = Params::make();
  for (int p = 0; p <= 3; ++p) {
    const LocalOperators a = local_operators(geometry(T), p, prm), b = local_operators(geometry(M), p, prm);
    EXPECT_LT(rel_diff(a.A, b.A), 1e-12);
    EXPECT_LT(rel_diff(a.R, b.R), 1e-12);
  }
}

TEST(LocalOperators, EdgeOrientationOnlyFlipsOddModes) {
  const std::array<Vec2, 3> T{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  const int p = 2;
  const LocalOperators a = local_operators(geometry(T), p, Params::make());
  const LocalOperators b = local_operators(geometry(T, {false, true, false}), p, Params::make());
  Eigen::VectorXd flip = Eigen::VectorXd::Ones(a.local_size());
  for (int k = 1; k <= p; k += 2) flip(a.cell_size() + (p + 1) + k) = -1;
  EXPECT_LT(rel_diff(flip.asDiagonal() * a.A * flip.asDiagonal(), b.A), 1e-13);
}

TEST(Interpolation, EdgeMeansOfSineProduct) {
  const ScalarField v = [](const Vec2& x) {
    return std::sin(std::numbers::pi * x(0)) * std::sin(std::numbers::pi * x(1));
  };
  const Mesh m = square_domain().mesh();
  const HHOVector Iv = interpolate(v, m, 0, 30);
  const DofMap dm(m, 0);
  for (Index e = 0; e < m.num_edges(); ++e) {
    const Index f = dm.face_of_edge[e];
    if (f < 0) continue;
    const Edge& ed = m.edges()[e];
    const Vec2 a = m.point(ed.v[0]), b = m.point(ed.v[1]);
    const double mean = testing_support::composite_gauss([&](double t) { return v(a + t * (b - a)); }, 0, 1, 200);
    EXPECT_NEAR(Iv.face_coeffs(f) / std::sqrt(ed.length), mean, 1e-12);
  }
  // interior diagonals from a corner to the centre: mean of sin^2(pi t / 2) over [0,1] = 1/2
  for (Index f = 0; f < dm.num_faces; ++f)
    EXPECT_NEAR(Iv.face_coeffs(f) / std::sqrt(std::sqrt(0.5)), 0.5, 1e-12);
}

TEST(Interpolation, Linearity) {
  const Mesh m = uniform_refine(lshape_domain().mesh());
  const ScalarField f = [](const Vec2& x) { return std::sin(x(0)) * (1 - x(1) * x(1)); };
  const ScalarField g = [](const Vec2& x) { return std::exp(x(0) * x(1)); };
  const HHOVector If = interpolate(f, m, 2), Ig = interpolate(g, m, 2);
  HHOVector Ifg = interpolate([&](const Vec2& x) { return 2 * f(x) - 3 * g(x); }, m, 2);
  HHOVector lin = If;
  lin *= 2.0;
  HHOVector tmp = Ig;
  tmp *= -3.0;
  lin += tmp;
  EXPECT_LT((Ifg.cell_coeffs - lin.cell_coeffs).norm(), 1e-12);
  EXPECT_LT((Ifg.face_coeffs - lin.face_coeffs).norm(), 1e-12);
}

TEST(Interpolation, ReproducesCellPolynomials) {
  // v = x(1-x)y(1-y) has degree 4, so it is reproduced on cells for p >= 3
  const ScalarField v = [](const Vec2& x) { return x(0) * (1 - x(0)) * x(1) * (1 - x(1)); };
  const Mesh m = square_domain().mesh();
  const HHOVector Iv = interpolate(v, m, 3);
  const DofMap dm(m, 3);
  for (Index t = 0; t < m.num_triangles(); ++t) {
    const CellBasis cb(m.frame(t), 4);
    const Vec2 y = m.frame(t).centroid();
    EXPECT_NEAR(cb.eval(Iv.cell_coeffs.segment(t * dm.cell_size(), dm.cell_size()), y), v(y), 1e-14);
  }
}
