// Stabilisation-free residual estimator built from p_h = Pi_p G u_h, checks of the
// discrete identities it relies on, and Doerfler marking.
#pragma once

#include "hhoglb/assembly.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace hhoglb {

/// Piecewise P_p(T;R^2) field; per cell the x-component coefficients come first,
/// then the y-component coefficients, in the orthonormal CellBasis of degree p.
struct PiecewiseField {
  int p = 0;
  std::vector<Eigen::VectorXd> coeffs;

  int cell_size() const { return 2 * dim_poly(p); }
};

namespace detail {

struct FieldPoint {
  Vec2 value;
  double div;
  double curl;
};

inline FieldPoint field_at(const CellBasis& basis, const Eigen::VectorXd& c, const Vec2& x) {
  const int d = basis.size();
  Eigen::VectorXd phi;
  Mat2X grad;
  basis.evaluate(x, phi, grad);
  const auto cx = c.head(d), cy = c.tail(d);
  FieldPoint f;
  f.value = Vec2(phi.dot(cx), phi.dot(cy));
  f.div = grad.row(0).dot(cx) + grad.row(1).dot(cy);
  f.curl = grad.row(0).dot(cy) - grad.row(1).dot(cx);
  return f;
}

// Gradients of the barycentric coordinates of a counter-clockwise triangle.
inline std::array<Vec2, 3> barycentric_gradients(const Mesh& mesh, Index t) {
  const auto& tv = mesh.triangles()[t].v;
  const double twice_area = 2.0 * mesh.area(t);
  std::array<Vec2, 3> g;
  for (int k = 0; k < 3; ++k) {
    const Vec2 a = mesh.point(tv[(k + 1) % 3]), b = mesh.point(tv[(k + 2) % 3]);
    g[k] = Vec2(a(1) - b(1), b(0) - a(0)) / twice_area;
  }
  return g;
}

}  // namespace detail

/// p_h|_T = Pi_p(G u_h|_T): the leading coordinates of the orthonormal RT basis.
inline PiecewiseField compute_ph(const BlockSystem& sys, const Mesh& mesh, const HHOVector& u) {
  PiecewiseField ph;
  ph.p = sys.p;
  ph.coeffs.reserve(mesh.num_triangles());
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const LocalOperators& op = sys.locals[t];
    const Eigen::VectorXd g = op.G * local_dofs(mesh, sys.dofs, u, t);
    ph.coeffs.push_back(g.head(op.rt_polynomial_size()));
  }
  return ph;
}

inline double field_l2_norm(const PiecewiseField& ph) {
  double s = 0.0;
  for (const auto& c : ph.coeffs) s += c.squaredNorm();
  return std::sqrt(s);
}

struct Indicators {
  std::vector<double> eta_sq;
  double total = 0.0;
};

/// eta^2(T) = |T| (||div p_h + lambda u_T||^2 + ||curl p_h||^2)
///          + |T|^{1/2} (sum over interior edges of ||[p_h . nu]||^2
///                       + sum over all edges of ||[p_h . t]||^2),
/// with t = nu rotated by +pi/2 and the trace as tangential jump on the boundary.
inline Indicators estimate(const Mesh& mesh, const PiecewiseField& ph, const HHOVector& u,
                           double lambda) {
  const int p = ph.p;
  const int nc = dim_poly(p + 1);
  Indicators ind;
  ind.eta_sq.assign(mesh.num_triangles(), 0.0);
  std::vector<CellBasis> fb(mesh.num_triangles());
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const CellFrame cell = mesh.frame(t);
    fb[t] = CellBasis(cell, p);
    const CellBasis ub(cell, p + 1);
    const Eigen::VectorXd uc = u.cell_coeffs.segment(t * nc, nc);
    const CellQuadrature q = cell_quadrature(cell, 2 * p + 4);
    double vol = 0.0;
    for (std::size_t i = 0; i < q.points.size(); ++i) {
      const detail::FieldPoint f = detail::field_at(fb[t], ph.coeffs[t], q.points[i]);
      const double r = f.div + lambda * ub.values(q.points[i]).dot(uc);
      vol += q.weights[i] * (r * r + f.curl * f.curl);
    }
    ind.eta_sq[t] = cell.area() * vol;
  }
  for (const Edge& e : mesh.edges()) {
    const Vec2 a = mesh.point(e.v[0]), b = mesh.point(e.v[1]);
    const Vec2 nu = e.normal;
    const Vec2 tau(-nu(1), nu(0));
    const EdgeQuadrature eq = edge_quadrature(e.length, 2 * p + 2);
    const Index tp = e.triangles[0], tm = e.triangles[1];
    double jn = 0.0, jt = 0.0;
    for (std::size_t i = 0; i < eq.params.size(); ++i) {
      const Vec2 x = a + eq.params[i] * (b - a);
      Vec2 jump = detail::field_at(fb[tp], ph.coeffs[tp], x).value;
      if (tm >= 0) jump -= detail::field_at(fb[tm], ph.coeffs[tm], x).value;
      const double n = jump.dot(nu), t = jump.dot(tau);
      jn += eq.weights[i] * n * n;
      jt += eq.weights[i] * t * t;
    }
    const double contrib = e.is_boundary ? jt : jn + jt;
    ind.eta_sq[tp] += std::sqrt(mesh.area(tp)) * contrib;
    if (tm >= 0) ind.eta_sq[tm] += std::sqrt(mesh.area(tm)) * contrib;
  }
  ind.total = std::accumulate(ind.eta_sq.begin(), ind.eta_sq.end(), 0.0);
  return ind;
}

struct IdentityCheck {
  /// max over interior vertices z of |(p_h, grad phi_z) - lambda (u_T, phi_z)|
  double a1 = 0.0;
  /// max over all vertices z of |(p_h, Curl phi_z)|
  double a2 = 0.0;
  double ph_norm = 0.0;

  double a1_relative() const { return ph_norm > 0.0 ? a1 / ph_norm : a1; }
  double a2_relative() const { return ph_norm > 0.0 ? a2 / ph_norm : a2; }
};

/// Tests p_h against conforming P1 hat functions phi_z (first identity) and the
/// divergence-free lowest-order Raviart-Thomas fields Curl phi_z (second identity).
inline IdentityCheck verify_A1_A2(const Mesh& mesh, const PiecewiseField& ph, const HHOVector& u,
                                  double lambda) {
  const int p = ph.p;
  const int nc = dim_poly(p + 1), d = dim_poly(p);
  std::vector<double> r1(mesh.num_vertices(), 0.0), r2(mesh.num_vertices(), 0.0);
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const CellFrame cell = mesh.frame(t);
    const CellBasis ub(cell, p + 1);
    const Eigen::VectorXd uc = u.cell_coeffs.segment(t * nc, nc);
    // the integral of an orthonormal basis function is sqrt|T| for the constant, else 0
    const Vec2 mean_ph = std::sqrt(cell.area()) * Vec2(ph.coeffs[t](0), ph.coeffs[t](d));
    const auto grads = detail::barycentric_gradients(mesh, t);
    const CellQuadrature q = cell_quadrature(cell, p + 2);
    const auto& tv = mesh.triangles()[t].v;
    for (int k = 0; k < 3; ++k) {
      double ul = 0.0;
      for (std::size_t i = 0; i < q.points.size(); ++i) {
        const Vec2 x = q.points[i];
        // barycentric coordinate of vertex k at x
        const double bary = 1.0 + grads[k].dot(x - mesh.point(tv[k]));
        ul += q.weights[i] * ub.values(x).dot(uc) * bary;
      }
      r1[tv[k]] += mean_ph.dot(grads[k]) - lambda * ul;
      const Vec2 curl(grads[k](1), -grads[k](0));
      r2[tv[k]] += mean_ph.dot(curl);
    }
  }
  const std::vector<bool> interior = mesh.interior_vertex_mask();
  IdentityCheck out;
  for (Index z = 0; z < mesh.num_vertices(); ++z) {
    if (interior[z]) out.a1 = std::max(out.a1, std::abs(r1[z]));
    out.a2 = std::max(out.a2, std::abs(r2[z]));
  }
  out.ph_norm = field_l2_norm(ph);
  return out;
}

/// Minimal set M (greedy by decreasing indicator, ties by index) with
/// sum_{T in M} eta^2(T) >= theta eta^2. Returned in ascending index order.
inline std::vector<Index> mark_doerfler(const std::vector<double>& eta_sq, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("mark_doerfler: theta must lie in (0,1]");
  std::vector<Index> order(eta_sq.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return eta_sq[a] > eta_sq[b]; });
  double total = 0.0;
  for (Index t : order) total += eta_sq[t];
  std::vector<Index> marked;
  double acc = 0.0;
  for (Index t : order) {
    if (acc >= theta * total) break;
    acc += eta_sq[t];
    marked.push_back(t);
  }
  std::sort(marked.begin(), marked.end());
  return marked;
}

inline std::vector<Index> mark_doerfler(const Indicators& ind, double theta) {
  return mark_doerfler(ind.eta_sq, theta);
}

}  // namespace hhoglb
