// Local hybrid high-order machinery on P_{p+1}(T) x P_p(F): interpolation,
// potential and gradient reconstruction, stabilisation and the local forms.
//
// Local dof ordering: the dim P_{p+1} cell coefficients, then p+1 coefficients for
// each of the three local edges in local edge order. Edge coefficients refer to a
// Legendre basis parametrised from the lower to the higher global vertex index, so
// neighbouring cells agree on them.
#pragma once

#include "hhoglb/basis.hpp"
#include "hhoglb/mesh.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace hhoglb {

/// Parameters of the discrete bilinear form and of the lower-bound certificate.
struct Params {
  double alpha = 0.5;
  double beta = 0.0;
  double C_P = 1.0 / (std::numbers::sqrt2 * std::numbers::pi);
  double C_st2 = std::numbers::sqrt2;

  double sigma2_sq() const { return C_P * C_P * C_st2 * C_st2; }

  /// beta defaults to alpha / sigma_2^2, the largest admissible value.
  static Params make(double alpha = 0.5, double C_P = 1.0 / (std::numbers::sqrt2 * std::numbers::pi),
                     double C_st2 = std::numbers::sqrt2,
                     double beta = std::numeric_limits<double>::quiet_NaN()) {
    Params prm;
    prm.alpha = alpha;
    prm.C_P = C_P;
    prm.C_st2 = C_st2;
    prm.beta = std::isnan(beta) ? alpha / prm.sigma2_sq() : beta;
    prm.validate();
    return prm;
  }

  /// beta * sigma_2^2 <= alpha up to a few ulps (alpha / s * s may round upwards).
  bool beta_admissible() const { return beta * sigma2_sq() <= alpha * (1.0 + 1e-12); }

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("Params: alpha must lie in (0,1)");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("Params: beta must be positive");
    if (!(C_P > 0.0) || !(C_st2 > 0.0)) throw std::invalid_argument("Params: constants must be positive");
    if (!beta_admissible())
      throw std::invalid_argument("Params: beta * sigma2^2 exceeds alpha");
  }
};

/// Cell geometry with the orientation of the three edge bases.
struct LocalGeometry {
  CellFrame cell;
  std::array<Vec2, 3> face_start{};
  std::array<Vec2, 3> face_end{};
  std::array<Vec2, 3> normal{};  // outward

  /// Counter-clockwise vertices; reversed[k] flips the basis direction of edge k.
  LocalGeometry(const Vec2& a, const Vec2& b, const Vec2& c, std::array<bool, 3> reversed = {})
      : cell(a, b, c) {
    const std::array<Vec2, 3> v{a, b, c};
    if (detail::signed_area(a, b, c) <= 0.0)
      throw std::invalid_argument("LocalGeometry: vertices must be counter-clockwise");
    for (int k = 0; k < 3; ++k) {
      const Vec2 s = v[k], e = v[(k + 1) % 3];
      const Vec2 d = e - s;
      normal[k] = Vec2(d(1), -d(0)) / d.norm();
      face_start[k] = reversed[k] ? e : s;
      face_end[k] = reversed[k] ? s : e;
    }
  }

  FaceBasis face_basis(int k, int p) const { return FaceBasis(face_start[k], face_end[k], p); }
};

inline LocalGeometry local_geometry(const Mesh& mesh, Index t) {
  const Triangle& tr = mesh.triangles()[t];
  std::array<bool, 3> reversed{};
  for (int k = 0; k < 3; ++k) reversed[k] = tr.v[k] > tr.v[(k + 1) % 3];
  return LocalGeometry(mesh.point(tr.v[0]), mesh.point(tr.v[1]), mesh.point(tr.v[2]), reversed);
}

/// Local operators of one cell. R and S map local dofs to P_{p+1}(T) coefficients,
/// G maps them to RT_p(T) coefficients; A and B are the local forms.
struct LocalOperators {
  int p = 0;
  double h = 0.0;
  Eigen::MatrixXd R, G, S, A, B;

  int cell_size() const { return dim_poly(p + 1); }
  int face_size() const { return p + 1; }
  int local_size() const { return cell_size() + 3 * face_size(); }
  int rt_size() const { return (p + 1) * (p + 3); }
  int rt_polynomial_size() const { return 2 * dim_poly(p); }
};

/// Realises (Gu,Gv) - alpha((1-P_p)Gu,(1-P_p)Gv) + beta h^-2 (Su,Sv).
inline Eigen::MatrixXd local_form_difference(const LocalOperators& op, const Params& prm) {
  const int np = op.rt_polynomial_size();
  const Eigen::MatrixXd Gh = op.G.bottomRows(op.rt_size() - np);
  Eigen::MatrixXd A = op.G.transpose() * op.G - prm.alpha * (Gh.transpose() * Gh) +
                      (prm.beta / (op.h * op.h)) * (op.S.transpose() * op.S);
  return 0.5 * (A + A.transpose());
}

/// Realises ((1-alpha)Gu + alpha P_p Gu, Gv) + beta h^-2 (Su,Sv).
inline Eigen::MatrixXd local_form_weighted(const LocalOperators& op, const Params& prm) {
  Eigen::VectorXd w = Eigen::VectorXd::Constant(op.rt_size(), 1.0 - prm.alpha);
  w.head(op.rt_polynomial_size()).setOnes();
  Eigen::MatrixXd A = op.G.transpose() * w.asDiagonal() * op.G +
                      (prm.beta / (op.h * op.h)) * (op.S.transpose() * op.S);
  return 0.5 * (A + A.transpose());
}

inline LocalOperators local_operators(const LocalGeometry& g, int p, const Params& prm) {
  if (p < 0) throw std::invalid_argument("local_operators: negative degree");
  LocalOperators op;
  op.p = p;
  op.h = g.cell.diameter();
  const CellBasis cb(g.cell, p + 1);
  const RTBasis rt(g.cell, p);
  const int nc = op.cell_size(), nf = op.face_size(), nl = op.local_size(), nr = op.rt_size();

  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nc, nc);
  Eigen::MatrixXd rhsR = Eigen::MatrixXd::Zero(nc, nl);
  Eigen::MatrixXd rhsG = Eigen::MatrixXd::Zero(nr, nl);
  Eigen::VectorXd phi, rdiv;
  Mat2X grad, rv;

  const CellQuadrature cq = cell_quadrature(g.cell, 2 * p + 2);
  for (std::size_t i = 0; i < cq.points.size(); ++i) {
    cb.evaluate(cq.points[i], phi, grad);
    rt.evaluate(cq.points[i], rv, rdiv);
    K.noalias() += cq.weights[i] * grad.transpose() * grad;
    rhsG.leftCols(nc).noalias() += cq.weights[i] * rv.transpose() * grad;
  }
  rhsR.leftCols(nc) = K;

  for (int k = 0; k < 3; ++k) {
    const FaceBasis fb = g.face_basis(k, p);
    const EdgeQuadrature eq = edge_quadrature(fb.length(), 2 * p + 2);
    for (std::size_t i = 0; i < eq.params.size(); ++i) {
      const Vec2 x = fb.point(eq.params[i]);
      const Eigen::VectorXd psi = fb.values(eq.params[i]);
      cb.evaluate(x, phi, grad);
      rt.evaluate(x, rv, rdiv);
      const Eigen::VectorXd gn = grad.transpose() * g.normal[k];
      const Eigen::VectorXd rn = rv.transpose() * g.normal[k];
      const double w = eq.weights[i];
      rhsR.leftCols(nc).noalias() -= w * gn * phi.transpose();
      rhsR.middleCols(nc + k * nf, nf).noalias() += w * gn * psi.transpose();
      rhsG.leftCols(nc).noalias() -= w * rn * phi.transpose();
      rhsG.middleCols(nc + k * nf, nf).noalias() += w * rn * psi.transpose();
    }
  }

  // Neumann problem with the constant mode pinned: in the orthonormal basis the
  // mean of R v equals the mean of v_T exactly when coefficient 0 is copied.
  op.R = Eigen::MatrixXd::Zero(nc, nl);
  op.R(0, 0) = 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(K.bottomRightCorner(nc - 1, nc - 1));
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("local_operators: singular local stiffness (degenerate cell)");
  op.R.bottomRows(nc - 1) = llt.solve(rhsR.bottomRows(nc - 1));

  op.G = rhsG;  // the RT basis is orthonormal, so the Riesz map is the identity
  op.S = -op.R;
  op.S.leftCols(nc) += Eigen::MatrixXd::Identity(nc, nc);
  op.A = local_form_difference(op, prm);
  op.B = Eigen::MatrixXd::Identity(nc, nc);
  return op;
}

inline LocalOperators local_operators(const Mesh& mesh, Index t, int p, const Params& prm) {
  return local_operators(local_geometry(mesh, t), p, prm);
}

/// Local interpolation (Pi_{p+1} v, Pi_F^p v on all three edges).
inline Eigen::VectorXd interpolate_local(const ScalarField& v, const LocalGeometry& g, int p,
                                         int quad_degree = -1) {
  const int qd = quad_degree < 0 ? std::min(kMaxTriangleDegree, 2 * p + 10) : quad_degree;
  const int nc = dim_poly(p + 1), nf = p + 1;
  Eigen::VectorXd x(nc + 3 * nf);
  x.head(nc) = l2_project_cell(v, g.cell, p + 1, qd);
  for (int k = 0; k < 3; ++k) {
    const FaceBasis fb = g.face_basis(k, p);
    const EdgeQuadrature eq = edge_quadrature(fb.length(), qd);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(nf);
    for (std::size_t i = 0; i < eq.params.size(); ++i)
      c += eq.weights[i] * v(fb.point(eq.params[i])) * fb.values(eq.params[i]);
    x.segment(nc + k * nf, nf) = c;
  }
  return x;
}

/// Numbering of the global unknowns: cell blocks by triangle, face blocks by
/// interior edge (boundary edges carry no unknowns).
struct DofMap {
  int p = 0;
  Index num_cells = 0;
  Index num_faces = 0;
  std::vector<Index> face_of_edge;  // -1 on boundary edges

  DofMap() = default;
  DofMap(const Mesh& mesh, int degree) : p(degree), num_cells(mesh.num_triangles()) {
    face_of_edge.assign(mesh.num_edges(), -1);
    for (Index e = 0; e < mesh.num_edges(); ++e)
      if (!mesh.edges()[e].is_boundary) face_of_edge[e] = num_faces++;
  }

  int cell_size() const { return dim_poly(p + 1); }
  int face_size() const { return p + 1; }
  /// Number of cell unknowns N.
  Index N() const { return num_cells * cell_size(); }
  Index face_dofs() const { return num_faces * face_size(); }
  Index ndof() const { return N() + face_dofs(); }
};

/// Global discrete function (v_T, v_F); face values on boundary edges are zero.
struct HHOVector {
  int p = 0;
  Eigen::VectorXd cell_coeffs;
  Eigen::VectorXd face_coeffs;

  HHOVector() = default;
  explicit HHOVector(const DofMap& dm)
      : p(dm.p), cell_coeffs(Eigen::VectorXd::Zero(dm.N())),
        face_coeffs(Eigen::VectorXd::Zero(dm.face_dofs())) {}

  HHOVector& operator+=(const HHOVector& o) {
    cell_coeffs += o.cell_coeffs;
    face_coeffs += o.face_coeffs;
    return *this;
  }
  HHOVector& operator*=(double s) {
    cell_coeffs *= s;
    face_coeffs *= s;
    return *this;
  }
};

/// Local dof vector of triangle t extracted from a global function.
inline Eigen::VectorXd local_dofs(const Mesh& mesh, const DofMap& dm, const HHOVector& v, Index t) {
  const int nc = dm.cell_size(), nf = dm.face_size();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(nc + 3 * nf);
  x.head(nc) = v.cell_coeffs.segment(t * nc, nc);
  for (int k = 0; k < 3; ++k) {
    const Index f = dm.face_of_edge[mesh.triangle_edge(t, k)];
    if (f >= 0) x.segment(nc + k * nf, nf) = v.face_coeffs.segment(f * nf, nf);
  }
  return x;
}

/// Interpolation I v for v vanishing on the boundary.
inline HHOVector interpolate(const ScalarField& v, const Mesh& mesh, int p, int quad_degree = -1) {
  const DofMap dm(mesh, p);
  const int qd = quad_degree < 0 ? std::min(kMaxTriangleDegree, 2 * p + 10) : quad_degree;
  HHOVector out(dm);
  const int nc = dm.cell_size(), nf = dm.face_size();
  for (Index t = 0; t < mesh.num_triangles(); ++t)
    out.cell_coeffs.segment(t * nc, nc) = l2_project_cell(v, mesh.frame(t), p + 1, qd);
  for (Index e = 0; e < mesh.num_edges(); ++e) {
    const Index f = dm.face_of_edge[e];
    if (f < 0) continue;
    const Edge& ed = mesh.edges()[e];
    const FaceBasis fb(mesh.point(ed.v[0]), mesh.point(ed.v[1]), p);
    const EdgeQuadrature eq = edge_quadrature(fb.length(), qd);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(nf);
    for (std::size_t i = 0; i < eq.params.size(); ++i)
      c += eq.weights[i] * v(fb.point(eq.params[i])) * fb.values(eq.params[i]);
    out.face_coeffs.segment(f * nf, nf) = c;
  }
  return out;
}

}  // namespace hhoglb
