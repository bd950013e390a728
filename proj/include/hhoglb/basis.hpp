// L2-orthonormal polynomial bases on triangles and edges, the local
// Raviart-Thomas space RT_p(T) = P_p(T;R^2) + x P_p(T), and the cellwise L2,
// Raviart-Thomas and Galerkin projections.
//
// Cell bases are the collapsed-coordinate (Dubiner) orthogonal polynomials on the
// bi-unit triangle, pulled back affinely to the physical cell and scaled to unit
// L2(T) norm. The affine map has a constant Jacobian, so orthogonality is exact
// on every triangle and the basis is hierarchical in the total degree.
#pragma once

#include "hhoglb/quadrature.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace hhoglb {

using Mat2X = Eigen::Matrix<double, 2, Eigen::Dynamic>;

/// Dimension of P_m in two variables.
constexpr int dim_poly(int m) { return m < 0 ? 0 : (m + 1) * (m + 2) / 2; }

/// Total degree of the k-th hierarchical basis function.
inline int basis_degree(int k) {
  int d = 0;
  while (dim_poly(d) <= k) ++d;
  return d;
}

namespace detail {

struct JacobiCoefficients {
  double a1, a2, a3;
};

// Three-term recurrence coefficients of P_{n+1}^{(a,b)} in terms of P_n and P_{n-1}.
inline JacobiCoefficients jacobi_recurrence(double a, double b, int n) {
  const double an = (2 * n + 1 + a + b) * (2 * n + 2 + a + b) / (2 * (n + 1) * (n + 1 + a + b));
  const double bn = (a * a - b * b) * (2 * n + 1 + a + b) /
                    (2 * (n + 1) * (2 * n + a + b) * (n + 1 + a + b));
  const double cn = (n + a) * (n + b) * (2 * n + 2 + a + b) /
                    ((n + 1) * (n + 1 + a + b) * (2 * n + a + b));
  return {an, bn, cn};
}

inline int dubiner_index(int p, int q) { return (p + q) * (p + q + 1) / 2 + q; }

}  // namespace detail

/// Orthonormal Dubiner polynomials of total degree <= m on the bi-unit triangle
/// conv{(-1,-1), (1,-1), (-1,1)}, with gradients. Uses the singularity-free
/// recurrences in Cartesian coordinates, so points on the collapsed vertex are fine.
inline void dubiner_eval(int m, double x, double y, Eigen::Ref<Eigen::VectorXd> val,
                         Mat2X* grad) {
  const int n = dim_poly(m);
  std::vector<double> dx(n, 0.0), dy(n, 0.0);
  using detail::dubiner_index;
  val.setZero();
  val(0) = 1.0;
  if (m > 0) {
    const double f1 = 0.5 * (1.0 + 2.0 * x + y);
    const double f2 = 0.5 * (1.0 - y);
    const double f3 = f2 * f2;
    const double f3y = -f2;
    val(dubiner_index(1, 0)) = f1;
    dx[dubiner_index(1, 0)] = 1.0;
    dy[dubiner_index(1, 0)] = 0.5;
    for (int p = 1; p < m; ++p) {
      const double a = (2.0 * p + 1.0) / (p + 1.0);
      const double b = p / (p + 1.0);
      const int k1 = dubiner_index(p + 1, 0), k0 = dubiner_index(p, 0),
                km = dubiner_index(p - 1, 0);
      val(k1) = a * f1 * val(k0) - b * f3 * val(km);
      dx[k1] = a * (val(k0) + f1 * dx[k0]) - b * f3 * dx[km];
      dy[k1] = a * (0.5 * val(k0) + f1 * dy[k0]) - b * (f3y * val(km) + f3 * dy[km]);
    }
    for (int p = 0; p < m; ++p) {
      const double c = 0.5 * (1.0 + 2.0 * p + (3.0 + 2.0 * p) * y);
      const double cy = 0.5 * (3.0 + 2.0 * p);
      const int k1 = dubiner_index(p, 1), k0 = dubiner_index(p, 0);
      val(k1) = c * val(k0);
      dx[k1] = c * dx[k0];
      dy[k1] = cy * val(k0) + c * dy[k0];
    }
    for (int p = 0; p + 1 < m; ++p) {
      for (int q = 1; p + q < m; ++q) {
        const auto r = detail::jacobi_recurrence(2.0 * p + 1.0, 0.0, q);
        const int k1 = dubiner_index(p, q + 1), k0 = dubiner_index(p, q),
                  km = dubiner_index(p, q - 1);
        const double lin = r.a1 * y + r.a2;
        val(k1) = lin * val(k0) - r.a3 * val(km);
        dx[k1] = lin * dx[k0] - r.a3 * dx[km];
        dy[k1] = r.a1 * val(k0) + lin * dy[k0] - r.a3 * dy[km];
      }
    }
  }
  for (int p = 0; p <= m; ++p) {
    for (int q = 0; p + q <= m; ++q) {
      const int k = dubiner_index(p, q);
      const double s = std::sqrt((p + 0.5) * (p + q + 1.0));
      val(k) *= s;
      dx[k] *= s;
      dy[k] *= s;
    }
  }
  if (grad) {
    grad->resize(2, n);
    for (int k = 0; k < n; ++k) {
      (*grad)(0, k) = dx[k];
      (*grad)(1, k) = dy[k];
    }
  }
}

/// Affine geometry of a triangle with counter-clockwise vertices.
class CellFrame {
 public:
  CellFrame() = default;
  CellFrame(const Vec2& a, const Vec2& b, const Vec2& c) : v_{a, b, c} {
    jac_.col(0) = 0.5 * (b - a);
    jac_.col(1) = 0.5 * (c - a);
    const double det = jac_.determinant();
    if (!(std::abs(det) > 0.0) || !std::isfinite(det))
      throw std::invalid_argument("CellFrame: degenerate triangle");
    area_ = 2.0 * std::abs(det);
    jac_inv_ = jac_.inverse();
    diameter_ = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
    centroid_ = (a + b + c) / 3.0;
  }

  const Vec2& vertex(int i) const { return v_[i]; }
  double area() const { return area_; }
  double diameter() const { return diameter_; }
  const Vec2& centroid() const { return centroid_; }

  /// Physical point of reference coordinates (s, t) on conv{(0,0),(1,0),(0,1)}.
  Vec2 from_reference(const Vec2& st) const {
    return v_[0] + st(0) * (v_[1] - v_[0]) + st(1) * (v_[2] - v_[0]);
  }
  /// Bi-unit coordinates of a physical point.
  Vec2 to_biunit(const Vec2& x) const {
    return jac_inv_ * (x - v_[0]) - Vec2::Ones();
  }
  /// Maps bi-unit gradients to physical gradients.
  const Eigen::Matrix2d& jacobian_inverse() const { return jac_inv_; }

 private:
  std::array<Vec2, 3> v_{};
  Eigen::Matrix2d jac_ = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d jac_inv_ = Eigen::Matrix2d::Zero();
  double area_ = 0.0;
  double diameter_ = 0.0;
  Vec2 centroid_ = Vec2::Zero();
};

/// Physical quadrature points and weights on a cell.
struct CellQuadrature {
  std::vector<Vec2> points;
  std::vector<double> weights;
};

inline CellQuadrature cell_quadrature(const CellFrame& cell, int degree) {
  const QuadratureRule& ref = quad_rule_triangle(std::min(degree, kMaxTriangleDegree));
  CellQuadrature q;
  q.points.reserve(ref.size());
  q.weights.reserve(ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    q.points.push_back(cell.from_reference(ref.points[i]));
    q.weights.push_back(2.0 * cell.area() * ref.weights[i]);
  }
  return q;
}

/// L2(T)-orthonormal hierarchical basis of P_m(T).
class CellBasis {
 public:
  CellBasis() = default;
  CellBasis(const CellFrame& cell, int degree)
      : cell_(cell), degree_(degree), scale_(std::sqrt(2.0 / cell.area())) {
    if (degree < 0) throw std::invalid_argument("CellBasis: negative degree");
  }

  int degree() const { return degree_; }
  int size() const { return dim_poly(degree_); }
  const CellFrame& cell() const { return cell_; }

  Eigen::VectorXd values(const Vec2& x) const {
    Eigen::VectorXd v(size());
    const Vec2 r = cell_.to_biunit(x);
    dubiner_eval(degree_, r(0), r(1), v, nullptr);
    return scale_ * v;
  }

  /// Values and physical gradients (2 x size) at x.
  void evaluate(const Vec2& x, Eigen::VectorXd& val, Mat2X& grad) const {
    val.resize(size());
    const Vec2 r = cell_.to_biunit(x);
    dubiner_eval(degree_, r(0), r(1), val, &grad);
    val *= scale_;
    grad = scale_ * (cell_.jacobian_inverse().transpose() * grad);
  }

  double eval(const Eigen::VectorXd& coeffs, const Vec2& x) const {
    return values(x).head(coeffs.size()).dot(coeffs);
  }

 private:
  CellFrame cell_;
  int degree_ = 0;
  double scale_ = 1.0;
};

/// Legendre polynomial L_k(t) on (-1, 1) by the three-term recurrence.
inline double legendre_value(int k, double t) {
  if (k == 0) return 1.0;
  double lm = 1.0, l = t;
  for (int j = 1; j < k; ++j) {
    const double ln = ((2.0 * j + 1.0) * t * l - j * lm) / (j + 1.0);
    lm = l;
    l = ln;
  }
  return l;
}

/// L2(F)-orthonormal Legendre basis of P_p(F) on the segment from `start` to `end`.
/// The parametrisation direction fixes the sign of odd-degree functions.
class FaceBasis {
 public:
  FaceBasis() = default;
  FaceBasis(const Vec2& start, const Vec2& end, int degree)
      : start_(start), end_(end), degree_(degree), length_((end - start).norm()) {
    if (!(length_ > 0.0)) throw std::invalid_argument("FaceBasis: degenerate edge");
  }

  int degree() const { return degree_; }
  int size() const { return degree_ + 1; }
  double length() const { return length_; }
  const Vec2& start() const { return start_; }
  const Vec2& end() const { return end_; }

  /// Point at parameter s in [0, 1].
  Vec2 point(double s) const { return start_ + s * (end_ - start_); }

  /// Basis values at parameter s in [0, 1].
  Eigen::VectorXd values(double s) const {
    Eigen::VectorXd v(size());
    const double t = 2.0 * s - 1.0;
    double lm = 1.0, l = t;
    for (int k = 0; k <= degree_; ++k) {
      double lk;
      if (k == 0) {
        lk = 1.0;
      } else if (k == 1) {
        lk = t;
      } else {
        const double j = k - 1.0;
        lk = ((2.0 * j + 1.0) * t * l - j * lm) / (j + 1.0);
        lm = l;
        l = lk;
      }
      v(k) = std::sqrt((2.0 * k + 1.0) / length_) * lk;
    }
    return v;
  }

  /// Parameter of the orthogonal projection of x onto the edge line.
  double parameter(const Vec2& x) const {
    const Vec2 d = end_ - start_;
    return (x - start_).dot(d) / d.squaredNorm();
  }

 private:
  Vec2 start_ = Vec2::Zero(), end_ = Vec2::UnitX();
  int degree_ = 0;
  double length_ = 1.0;
};

/// Gauss points on an edge: parameters in [0,1] and weights scaled by the length.
struct EdgeQuadrature {
  std::vector<double> params;
  std::vector<double> weights;
};

inline EdgeQuadrature edge_quadrature(double length, int degree) {
  const GaussRule1D& g = gauss_legendre(degree);
  EdgeQuadrature q;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    q.params.push_back(0.5 * (g.nodes[i] + 1.0));
    q.weights.push_back(0.5 * length * g.weights[i]);
  }
  return q;
}

/// L2(T;R^2)-orthonormal basis of RT_p(T).
///
/// The first 2 dim P_p functions are (phi_k, 0) and (0, phi_k) for the orthonormal
/// basis phi_k of P_p(T); the remaining p+1 functions complete P_p(T;R^2) to
/// RT_p(T). Hence the L2 projection onto P_p(T;R^2) of a field in RT_p(T) keeps the
/// leading 2 dim P_p coordinates.
class RTBasis {
 public:
  RTBasis() = default;
  RTBasis(const CellFrame& cell, int degree) : scalar_(cell, degree), degree_(degree) {
    const int d = dim_poly(degree);
    const int n_raw = raw_size();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n_raw, n_raw);
    const CellQuadrature q = cell_quadrature(cell, 2 * degree + 2);
    Mat2X raw;
    Eigen::VectorXd div;
    for (std::size_t i = 0; i < q.points.size(); ++i) {
      raw_eval(q.points[i], raw, div);
      gram.noalias() += q.weights[i] * raw.transpose() * raw;
    }
    // The leading block is the identity up to round-off; use it exactly so the
    // P_p(T;R^2) part of the basis is the scalar basis verbatim.
    gram.topLeftCorner(2 * d, 2 * d).setIdentity();
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("RTBasis: singular Gram matrix");
    const Eigen::MatrixXd lower = llt.matrixL();
    const double cond_proxy = lower.diagonal().maxCoeff() / lower.diagonal().minCoeff();
    if (!(cond_proxy < 1e7))
      throw std::runtime_error("RTBasis: ill-conditioned Gram matrix (extreme aspect ratio)");
    coeff_ = lower.transpose().triangularView<Eigen::Upper>().solve(
        Eigen::MatrixXd::Identity(n_raw, n_raw));
  }

  int degree() const { return degree_; }
  int size() const { return (degree_ + 1) * (degree_ + 3); }
  /// Number of leading coordinates spanning P_p(T;R^2).
  int polynomial_size() const { return 2 * dim_poly(degree_); }
  const CellFrame& cell() const { return scalar_.cell(); }

  /// Values (2 x size) and divergences at x.
  void evaluate(const Vec2& x, Mat2X& val, Eigen::VectorXd& div) const {
    Mat2X raw;
    Eigen::VectorXd rdiv;
    raw_eval(x, raw, rdiv);
    val = raw * coeff_;
    div = coeff_.transpose() * rdiv;
  }

  Vec2 eval(const Eigen::VectorXd& coeffs, const Vec2& x) const {
    Mat2X val;
    Eigen::VectorXd div;
    evaluate(x, val, div);
    return val * coeffs;
  }

 private:
  int raw_size() const { return 2 * dim_poly(degree_) + degree_ + 1; }

  void raw_eval(const Vec2& x, Mat2X& raw, Eigen::VectorXd& div) const {
    const int d = dim_poly(degree_);
    const int d_low = dim_poly(degree_ - 1);
    Eigen::VectorXd phi;
    Mat2X grad;
    scalar_.evaluate(x, phi, grad);
    raw.setZero(2, raw_size());
    div.setZero(raw_size());
    for (int k = 0; k < d; ++k) {
      raw(0, k) = phi(k);
      raw(1, d + k) = phi(k);
      div(k) = grad(0, k);
      div(d + k) = grad(1, k);
    }
    const double h = scalar_.cell().diameter();
    const Vec2 y = (x - scalar_.cell().centroid()) / h;
    for (int k = d_low; k < d; ++k) {
      const int c = 2 * d + (k - d_low);
      raw.col(c) = y * phi(k);
      div(c) = (2.0 * phi(k) + y.dot(grad.col(k)) * h) / h;
    }
  }

  CellBasis scalar_;
  int degree_ = 0;
  Eigen::MatrixXd coeff_;
};

using ScalarField = std::function<double(const Vec2&)>;
using VectorField = std::function<Vec2(const Vec2&)>;

inline int default_quadrature_degree(int m) { return std::min(kMaxTriangleDegree, 2 * m + 6); }

/// Coefficients of the L2 projection of f onto P_m(T) in the orthonormal CellBasis.
inline Eigen::VectorXd l2_project_cell(const ScalarField& f, const CellFrame& cell, int m,
                                       int quad_degree = -1) {
  const CellBasis basis(cell, m);
  const CellQuadrature q =
      cell_quadrature(cell, quad_degree < 0 ? default_quadrature_degree(m) : quad_degree);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(basis.size());
  for (std::size_t i = 0; i < q.points.size(); ++i)
    c += q.weights[i] * f(q.points[i]) * basis.values(q.points[i]);
  return c;
}

/// Coefficients of the L2 projection of v onto RT_p(T) in the orthonormal RTBasis.
inline Eigen::VectorXd l2_project_rt(const VectorField& v, const CellFrame& cell, int p,
                                     int quad_degree = -1) {
  const RTBasis basis(cell, p);
  const CellQuadrature q =
      cell_quadrature(cell, quad_degree < 0 ? default_quadrature_degree(p + 1) : quad_degree);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(basis.size());
  Mat2X val;
  Eigen::VectorXd div;
  for (std::size_t i = 0; i < q.points.size(); ++i) {
    basis.evaluate(q.points[i], val, div);
    c += q.weights[i] * (val.transpose() * v(q.points[i]));
  }
  return c;
}

/// Galerkin projection G f onto P_m(T): (grad G f, grad q) = (grad f, grad q) for all
/// q in P_m(T) with the mean of G f equal to the mean of f.
inline Eigen::VectorXd galerkin_project(const ScalarField& f, const VectorField& grad_f,
                                        const CellFrame& cell, int m, int quad_degree = -1) {
  const CellBasis basis(cell, m);
  const int n = basis.size();
  const CellQuadrature q =
      cell_quadrature(cell, quad_degree < 0 ? default_quadrature_degree(m) : quad_degree);
  Eigen::MatrixXd stiff = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd phi;
  Mat2X grad;
  for (std::size_t i = 0; i < q.points.size(); ++i) {
    basis.evaluate(q.points[i], phi, grad);
    stiff.noalias() += q.weights[i] * grad.transpose() * grad;
    rhs += q.weights[i] * grad.transpose() * grad_f(q.points[i]);
    c(0) += q.weights[i] * f(q.points[i]) * phi(0);
  }
  if (n > 1) {
    Eigen::LLT<Eigen::MatrixXd> llt(stiff.bottomRightCorner(n - 1, n - 1));
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("galerkin_project: singular stiffness block");
    c.tail(n - 1) = llt.solve(rhs.tail(n - 1));
  }
  return c;
}

}  // namespace hhoglb
