// Stability constants of a single triangle T:
//  * m_p^2, the largest eigenvalue of (q, r) = lambda ((-Delta)^{-1} curl q, curl r)
//    on the complement Q_p of grad P_{p+1}(T) in P_p(T;R^2), with (-Delta)^{-1}
//    approximated by conforming Lagrange elements on a uniform sub-triangulation;
//  * Rayleigh-quotient lower bounds for C_st,1 and C_st,2 over f in P_N(T);
//  * the sweep of m_p^2 over isosceles triangles conv{(0,0), (1,0), (cos w, sin w)}.
#pragma once

#include "hhoglb/mesh.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace hhoglb {

struct FemConfig {
  int degree = 4;
  int refines = 6;
};

/// Conforming P_d discretisation of -Delta w = g with w = 0 on the boundary of T.
class InverseLaplacian {
 public:
  InverseLaplacian(const std::array<Vec2, 3>& T, FemConfig cfg = {}) : T_(T), cfg_(cfg) {
    if (cfg.degree < 1 || cfg.degree > 10) throw std::invalid_argument("InverseLaplacian: degree must be in 1..10");
    if (cfg.refines < 0 || cfg.refines > 8) throw std::invalid_argument("InverseLaplacian: refines must be in 0..8");
    Mesh mesh = build_mesh({{T[0](0), T[0](1)}, {T[1](0), T[1](1)}, {T[2](0), T[2](1)}}, {{0, 1, 2}});
    for (int r = 0; r < cfg.refines; ++r) mesh = uniform_refine(mesh);
    const CellFrame big(T[0], T[1], T[2]);
    scale_ = big.diameter();
    const int d = cfg.degree;

    // equispaced nodes in reference coordinates
    std::vector<Vec2> ref_nodes;
    for (int j = 0; j <= d; ++j)
      for (int i = 0; i + j <= d; ++i) ref_nodes.emplace_back(double(i) / d, double(j) / d);
    const int nloc = static_cast<int>(ref_nodes.size());

    std::map<std::pair<long long, long long>, Index> ids;
    auto node_id = [&](const Vec2& x) {
      const auto key = std::make_pair(std::llround(x(0) / scale_ * 1e9), std::llround(x(1) / scale_ * 1e9));
      auto it = ids.find(key);
      if (it != ids.end()) return it->second;
      const Index id = static_cast<Index>(nodes_.size());
      nodes_.push_back(x);
      ids.emplace(key, id);
      return id;
    };

    std::vector<Eigen::Triplet<double>> trip;
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
      Element el;
      el.frame = mesh.frame(t);
      const CellBasis basis(el.frame, d);
      Eigen::MatrixXd V(nloc, nloc);
      for (int n = 0; n < nloc; ++n) {
        const Vec2 x = el.frame.from_reference(ref_nodes[n]);
        V.row(n) = basis.values(x).transpose();
        el.dofs.push_back(node_id(x));
      }
      el.coeff = V.inverse();  // column m: Lagrange function m in the orthonormal basis
      Eigen::MatrixXd Kd = Eigen::MatrixXd::Zero(nloc, nloc);
      const CellQuadrature q = cell_quadrature(el.frame, 2 * d);
      Eigen::VectorXd phi;
      Mat2X grad;
      for (std::size_t i = 0; i < q.points.size(); ++i) {
        basis.evaluate(q.points[i], phi, grad);
        Kd.noalias() += q.weights[i] * grad.transpose() * grad;
      }
      const Eigen::MatrixXd Kl = el.coeff.transpose() * Kd * el.coeff;
      for (int a = 0; a < nloc; ++a)
        for (int b = 0; b < nloc; ++b) trip.emplace_back(el.dofs[a], el.dofs[b], Kl(a, b));
      elements_.push_back(std::move(el));
    }

    // interior nodes: all barycentric coordinates of the big triangle positive
    const Eigen::Matrix2d& Jinv = big.jacobian_inverse();
    free_.assign(nodes_.size(), -1);
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
      const Vec2 r = 0.5 * (Jinv * (nodes_[n] - T[0]));
      const double l1 = r(0), l2 = r(1), l0 = 1.0 - l1 - l2;
      if (std::min({l0, l1, l2}) > 1e-10) free_[n] = num_free_++;
    }
    std::vector<Eigen::Triplet<double>> ftrip;
    for (const auto& tr : trip) {
      const Index i = free_[tr.row()], j = free_[tr.col()];
      if (i >= 0 && j >= 0) ftrip.emplace_back(i, j, tr.value());
    }
    K_.resize(num_free_, num_free_);
    K_.setFromTriplets(ftrip.begin(), ftrip.end());
    llt_.compute(K_);
    if (llt_.info() != Eigen::Success) throw std::runtime_error("InverseLaplacian: singular FEM system");
  }

  const FemConfig& config() const { return cfg_; }
  Index num_dofs() const { return num_free_; }

  /// Load vector (g, N_i) over the free nodes.
  Eigen::VectorXd load(const ScalarField& g, int g_degree) const {
    Eigen::VectorXd F = Eigen::VectorXd::Zero(num_free_);
    const int d = cfg_.degree;
    for (const Element& el : elements_) {
      const CellBasis basis(el.frame, d);
      const CellQuadrature q = cell_quadrature(el.frame, std::min(kMaxTriangleDegree, d + g_degree));
      Eigen::VectorXd loc = Eigen::VectorXd::Zero(el.coeff.cols());
      for (std::size_t i = 0; i < q.points.size(); ++i)
        loc += q.weights[i] * g(q.points[i]) * (el.coeff.transpose() * basis.values(q.points[i]));
      for (std::size_t a = 0; a < el.dofs.size(); ++a) {
        const Index f = free_[el.dofs[a]];
        if (f >= 0) F(f) += loc(a);
      }
    }
    return F;
  }

  /// Coefficients of the discrete solution w for a load vector.
  Eigen::VectorXd solve(const Eigen::VectorXd& F) const { return llt_.solve(F); }
  Eigen::MatrixXd solve(const Eigen::MatrixXd& F) const { return llt_.solve(F); }

  /// (grad w, grad w) for free-node coefficients w.
  double energy(const Eigen::VectorXd& w) const { return w.dot(K_ * w); }

 private:
  struct Element {
    CellFrame frame;
    std::vector<Index> dofs;
    Eigen::MatrixXd coeff;
  };

  std::array<Vec2, 3> T_;
  FemConfig cfg_;
  double scale_ = 1.0;
  std::vector<Vec2> nodes_;
  std::vector<Element> elements_;
  std::vector<Index> free_;
  Index num_free_ = 0;
  Eigen::SparseMatrix<double> K_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
};

namespace detail {

// Coefficients of grad phi_i (i = 1..dim P_{p+1}-1) in the orthonormal basis of
// P_p(T;R^2): rows 0..d-1 the x-component, rows d..2d-1 the y-component.
inline Eigen::MatrixXd gradient_coefficients(const CellFrame& cell, int p) {
  const int d = dim_poly(p), n = dim_poly(p + 1);
  const CellBasis hi(cell, p + 1);
  const CellQuadrature q = cell_quadrature(cell, 2 * p + 1);
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(2 * d, n - 1);
  Eigen::VectorXd phi;
  Mat2X grad;
  for (std::size_t i = 0; i < q.points.size(); ++i) {
    hi.evaluate(q.points[i], phi, grad);
    const Eigen::VectorXd lo = phi.head(d);  // hierarchical: P_p basis is the head
    C.topRows(d).noalias() += q.weights[i] * lo * grad.row(0).tail(n - 1);
    C.bottomRows(d).noalias() += q.weights[i] * lo * grad.row(1).tail(n - 1);
  }
  return C;
}

}  // namespace detail

/// Orthonormal basis of Q_p as columns of coefficients in the basis of P_p(T;R^2)
/// (x-component coefficients first). Empty for p = 0.
inline Eigen::MatrixXd build_Qp(const std::array<Vec2, 3>& T, int p) {
  if (p < 0) throw std::invalid_argument("build_Qp: negative degree");
  if (p == 0) return Eigen::MatrixXd(2, 0);
  const CellFrame cell(T[0], T[1], T[2]);
  const Eigen::MatrixXd C = detail::gradient_coefficients(cell, p);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullU);
  const Eigen::Index rank = C.cols();  // grad is injective modulo constants
  if (svd.singularValues()(rank - 1) < 1e-10 * svd.singularValues()(0))
    throw std::runtime_error("build_Qp: gradient coefficients are rank deficient");
  return svd.matrixU().rightCols(C.rows() - rank);
}

inline int dim_Qp(int p) { return p <= 0 ? 0 : (p + 1) * (p + 2) - (dim_poly(p + 1) - 1); }

struct StabConstResult {
  int p = 0;
  double m_p_sq = 1.0;
  double c_st2_upper = 1.0;
  double lower_c_st1 = 1.0;
  double lower_c_st2 = 1.0;
  int rayleigh_degree = 0;
  FemConfig fem;
  /// p = 0: C_st,2 = 1 exactly, no eigenproblem is solved.
  bool analytic = false;
};

/// The matrix b(q_i, q_j) over the Q_p basis.
inline Eigen::MatrixXd curl_form(const std::array<Vec2, 3>& T, int p, const InverseLaplacian& inv,
                                 const Eigen::MatrixXd& Q) {
  const CellFrame cell(T[0], T[1], T[2]);
  const CellBasis basis(cell, p);
  const int d = dim_poly(p);
  Eigen::MatrixXd F(inv.num_dofs(), Q.cols());
  for (Eigen::Index k = 0; k < Q.cols(); ++k) {
    const Eigen::VectorXd a = Q.col(k).head(d), b = Q.col(k).tail(d);
    const ScalarField curl = [&](const Vec2& x) {
      Eigen::VectorXd phi;
      Mat2X grad;
      basis.evaluate(x, phi, grad);
      return grad.row(0).dot(b) - grad.row(1).dot(a);
    };
    F.col(k) = inv.load(curl, std::max(0, p - 1));
  }
  const Eigen::MatrixXd W = inv.solve(F);
  Eigen::MatrixXd B = F.transpose() * W;
  return 0.5 * (B + B.transpose());
}

/// m_p^2 = 1 / lambda_min(b) since a is the identity on the orthonormal Q_p basis.
inline double compute_mp_sq(const std::array<Vec2, 3>& T, int p, const InverseLaplacian& inv) {
  if (p == 0) return 1.0;
  const Eigen::MatrixXd Q = build_Qp(T, p);
  const Eigen::MatrixXd B = curl_form(T, p, inv, Q);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  if (!(lmin > 1e-14 * es.eigenvalues().maxCoeff()))
    throw std::runtime_error("compute_mp: curl form is numerically singular on Q_p");
  return 1.0 / lmin;
}

/// Lower bounds sup_{f in P_N} |||(1 - Pi_{p+1}) f||| / ||(1 - Pi_p) grad f|| for C_st,1
/// and sup |||(1 - G) f||| / ||(1 - Pi_p) grad f|| for C_st,2.
inline std::pair<double, double> rayleigh_lower_bounds(const std::array<Vec2, 3>& T, int p, int N) {
  if (N < p + 2) throw std::invalid_argument("rayleigh_lower_bounds: need N >= p + 2");
  if (2 * N > kMaxTriangleDegree) throw std::invalid_argument("rayleigh_lower_bounds: N too large");
  const CellFrame cell(T[0], T[1], T[2]);
  const CellBasis basis(cell, N);
  const int n = basis.size(), d = dim_poly(p), nl = dim_poly(p + 1), nh = n - nl;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd Gx = Eigen::MatrixXd::Zero(d, n), Gy = Eigen::MatrixXd::Zero(d, n);
  const CellQuadrature q = cell_quadrature(cell, 2 * N);
  Eigen::VectorXd phi;
  Mat2X grad;
  for (std::size_t i = 0; i < q.points.size(); ++i) {
    basis.evaluate(q.points[i], phi, grad);
    K.noalias() += q.weights[i] * grad.transpose() * grad;
    Gx.noalias() += q.weights[i] * phi.head(d) * grad.row(0);
    Gy.noalias() += q.weights[i] * phi.head(d) * grad.row(1);
  }
  // In the hierarchical orthonormal basis (1 - Pi_{p+1}) f is the tail of f, and
  // (1 - Pi_p) grad f only depends on that tail.
  const Eigen::MatrixXd Khh = K.bottomRightCorner(nh, nh);
  const Eigen::MatrixXd Mhh = (Gx.transpose() * Gx + Gy.transpose() * Gy).bottomRightCorner(nh, nh);
  Eigen::MatrixXd D = Khh - Mhh;
  D = 0.5 * (D + D.transpose()).eval();
  // |||(1 - G) f|||^2 is the Schur complement after minimising over P_{p+1} modulo constants
  const Eigen::MatrixXd Kll = K.block(1, 1, nl - 1, nl - 1);
  const Eigen::MatrixXd Klh = K.block(1, nl, nl - 1, nh);
  Eigen::MatrixXd S = Khh - Klh.transpose() * Kll.llt().solve(Klh);
  S = 0.5 * (S + S.transpose()).eval();
  auto top = [&](const Eigen::MatrixXd& A) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, D, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("rayleigh_lower_bounds: eigensolver failed");
    return std::sqrt(es.eigenvalues().maxCoeff());
  };
  return {top(Khh), top(S)};
}

inline StabConstResult compute_mp(const std::array<Vec2, 3>& T, int p, const InverseLaplacian& inv,
                                  int rayleigh_degree = -1) {
  if (p < 0) throw std::invalid_argument("compute_mp: negative degree");
  StabConstResult r;
  r.p = p;
  r.fem = inv.config();
  r.rayleigh_degree = rayleigh_degree < 0 ? std::min(p + 6, kMaxTriangleDegree / 2) : rayleigh_degree;
  if (p == 0) {
    r.analytic = true;
    r.m_p_sq = 1.0;
    r.c_st2_upper = 1.0;
  } else {
    r.m_p_sq = compute_mp_sq(T, p, inv);
    r.c_st2_upper = std::max(1.0, std::sqrt(r.m_p_sq));
  }
  if (r.rayleigh_degree >= p + 2) std::tie(r.lower_c_st1, r.lower_c_st2) = rayleigh_lower_bounds(T, p, r.rayleigh_degree);
  return r;
}

inline StabConstResult compute_mp(const std::array<Vec2, 3>& T, int p, FemConfig cfg = {},
                                  int rayleigh_degree = -1) {
  const InverseLaplacian inv(T, cfg);
  return compute_mp(T, p, inv, rayleigh_degree);
}

inline std::array<Vec2, 3> right_isosceles_triangle() { return {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}; }

inline std::array<Vec2, 3> isosceles_triangle(double omega) {
  if (!(omega > 0.0 && omega < std::numbers::pi)) throw std::invalid_argument("isosceles_triangle: angle out of (0, pi)");
  return {Vec2(0, 0), Vec2(1, 0), Vec2(std::cos(omega), std::sin(omega))};
}

/// m_p^2 on conv{(0,0), (1,0), (cos w, sin w)} for each w.
inline std::vector<std::pair<double, double>> angle_sweep(const std::vector<double>& omegas, int p,
                                                          FemConfig cfg = {}) {
  std::vector<std::pair<double, double>> out;
  for (double w : omegas) {
    const auto T = isosceles_triangle(w);
    const InverseLaplacian inv(T, cfg);
    out.emplace_back(w, compute_mp_sq(T, p, inv));
  }
  return out;
}

inline void write_stabconst_csv(std::ostream& os, const std::vector<StabConstResult>& rows) {
  const auto old_prec = os.precision();
  os << "p,m_p_sq,c_st2_upper,lower_c_st1,lower_c_st2,fem_degree,fem_refines\n";
  os << std::setprecision(17);
  for (const auto& r : rows)
    os << r.p << ',' << r.m_p_sq << ',' << r.c_st2_upper << ',' << r.lower_c_st1 << ',' << r.lower_c_st2
       << ',' << r.fem.degree << ',' << r.fem.refines << '\n';
  os.precision(old_prec);
}

}  // namespace hhoglb
