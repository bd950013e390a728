// Global block system, static condensation, the symmetric generalized eigenvalue
// problem and the lower-bound certificate.
//
// Unknowns are ordered cells first (N = |T| dim P_{p+1}), then interior faces. The
// right-hand side pencil only involves the cell block, which is the identity in
// the orthonormal cell bases, so condensing the faces yields a standard symmetric
// eigenproblem for the Schur complement.
#pragma once

#include "hhoglb/hho.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace hhoglb {

using SpMat = Eigen::SparseMatrix<double>;

struct BlockSystem {
  int p = 0;
  Params params;
  DofMap dofs;
  double h_max = 0.0;
  Index N = 0;
  SpMat K;  // full matrix [[A_TT, A_TF], [A_FT, A_FF]]
  SpMat A_TT, A_TF, A_FF;
  SpMat B_TT;
  std::vector<LocalOperators> locals;
  /// Factorisation of A_FF shared by condensation and face recovery.
  std::shared_ptr<Eigen::SimplicialLDLT<SpMat>> A_FF_factor;

  SpMat A_FT() const { return SpMat(A_TF.transpose()); }
  Index face_dofs() const { return dofs.face_dofs(); }
  Index ndof() const { return dofs.ndof(); }
};

namespace detail {

inline Index global_dof(const Mesh& mesh, const DofMap& dm, Index t, int local) {
  const int nc = dm.cell_size(), nf = dm.face_size();
  if (local < nc) return t * nc + local;
  const int k = (local - nc) / nf;
  const Index f = dm.face_of_edge[mesh.triangle_edge(t, k)];
  if (f < 0) return -1;
  return dm.N() + f * nf + (local - nc) % nf;
}

}  // namespace detail

inline BlockSystem assemble(const Mesh& mesh, int p, const Params& params) {
  params.validate();
  BlockSystem sys;
  sys.p = p;
  sys.params = params;
  sys.dofs = DofMap(mesh, p);
  sys.h_max = mesh.h_max();
  sys.N = sys.dofs.N();
  const Index n = sys.dofs.ndof();
  sys.locals.reserve(mesh.num_triangles());
  std::vector<Eigen::Triplet<double>> trip;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    sys.locals.push_back(local_operators(mesh, t, p, params));
    const Eigen::MatrixXd& A = sys.locals.back().A;
    const int nl = static_cast<int>(A.rows());
    std::vector<Index> g(nl);
    for (int i = 0; i < nl; ++i) g[i] = detail::global_dof(mesh, sys.dofs, t, i);
    for (int j = 0; j < nl; ++j) {
      if (g[j] < 0) continue;
      for (int i = 0; i < nl; ++i)
        if (g[i] >= 0) trip.emplace_back(g[i], g[j], A(i, j));
    }
  }
  sys.K.resize(n, n);
  sys.K.setFromTriplets(trip.begin(), trip.end());
  const Index N = sys.N, nF = n - N;
  sys.A_TT = sys.K.topLeftCorner(N, N);
  sys.A_TF = sys.K.topRightCorner(N, nF);
  sys.A_FF = sys.K.bottomRightCorner(nF, nF);
  sys.B_TT.resize(N, N);
  sys.B_TT.setIdentity();
  sys.A_FF_factor = std::make_shared<Eigen::SimplicialLDLT<SpMat>>();
  if (nF > 0) {
    sys.A_FF_factor->compute(sys.A_FF);
    if (sys.A_FF_factor->info() != Eigen::Success ||
        (sys.A_FF_factor->vectorD().array() <= 0.0).any())
      throw std::runtime_error("assemble: A_FF is not positive definite");
  }
  return sys;
}

/// Dense Schur complement A_TT - A_TF A_FF^{-1} A_FT.
inline Eigen::MatrixXd condense(const BlockSystem& sys) {
  Eigen::MatrixXd S = Eigen::MatrixXd(sys.A_TT);
  if (sys.face_dofs() == 0) return S;
  const Eigen::MatrixXd X = sys.A_FF_factor->solve(Eigen::MatrixXd(sys.A_FT()));
  if (sys.A_FF_factor->info() != Eigen::Success)
    throw std::runtime_error("condense: A_FF solve failed");
  S.noalias() -= sys.A_TF * X;
  return S;
}

/// Face unknowns x_F = -A_FF^{-1} A_FT x_T.
inline Eigen::VectorXd recover_faces(const BlockSystem& sys, const Eigen::VectorXd& x_T) {
  if (sys.face_dofs() == 0) return Eigen::VectorXd();
  const Eigen::VectorXd rhs = -(sys.A_TF.transpose() * x_T);
  return sys.A_FF_factor->solve(rhs);
}

struct EigenResult {
  Eigen::VectorXd eigenvalues;          // ascending
  std::vector<HHOVector> eigenvectors;  // ||u_T||_{L2} = 1
  Eigen::VectorXd residuals;            // ||A x - lambda B x|| / ||B x||
  std::vector<int> cluster;             // equal ids: relative gap <= 1e-8
  std::string method;
};

struct EigenOptions {
  /// Largest N solved by the dense symmetric eigensolver.
  Index dense_limit = 400;
  /// Largest N handed to the dense solver when the Krylov method fails.
  Index dense_fallback_limit = 3000;
  double tolerance = 1e-9;
  int max_restarts = 30;
  int blocks_per_cycle = 12;
  unsigned seed = 12345;
};

namespace detail {

inline void normalize_sign(Eigen::Ref<Eigen::VectorXd> x) {
  Eigen::Index imax = 0;
  x.cwiseAbs().maxCoeff(&imax);
  if (x(imax) < 0.0) x = -x;
}

inline std::vector<int> clusters(const Eigen::VectorXd& lam) {
  std::vector<int> id(lam.size(), 0);
  for (Eigen::Index i = 1; i < lam.size(); ++i)
    id[i] = (std::abs(lam(i) - lam(i - 1)) <= 1e-8 * std::abs(lam(i - 1))) ? id[i - 1] : id[i - 1] + 1;
  return id;
}

// Residual of the condensed problem with faces recovered from x_T.
inline double condensed_residual(const BlockSystem& sys, const Eigen::VectorXd& x_T, double lambda) {
  Eigen::VectorXd r = sys.A_TT * x_T - lambda * x_T;
  if (sys.face_dofs() > 0) r += sys.A_TF * recover_faces(sys, x_T);
  return r.norm() / x_T.norm();
}

inline EigenResult finish(const BlockSystem& sys, const Eigen::VectorXd& lam, Eigen::MatrixXd X_T,
                          std::string method) {
  EigenResult res;
  res.method = std::move(method);
  res.eigenvalues = lam;
  res.residuals.resize(lam.size());
  for (Eigen::Index j = 0; j < lam.size(); ++j) {
    Eigen::VectorXd x = X_T.col(j);
    x /= x.norm();
    normalize_sign(x);
    HHOVector v(sys.dofs);
    v.cell_coeffs = x;
    if (sys.face_dofs() > 0) v.face_coeffs = recover_faces(sys, x);
    res.residuals(j) = condensed_residual(sys, x, lam(j));
    res.eigenvectors.push_back(std::move(v));
  }
  res.cluster = clusters(lam);
  return res;
}

// Orthonormalises the columns of W against V and among themselves; nearly
// dependent columns are dropped.
inline Eigen::MatrixXd orthonormalize_block(const Eigen::MatrixXd& V, Eigen::MatrixXd W) {
  for (int pass = 0; pass < 2; ++pass)
    if (V.cols() > 0) W.noalias() -= V * (V.transpose() * W);
  Eigen::MatrixXd out(W.rows(), 0);
  for (Eigen::Index j = 0; j < W.cols(); ++j) {
    Eigen::VectorXd w = W.col(j);
    const double n0 = w.norm();
    for (int pass = 0; pass < 2; ++pass) {
      if (V.cols() > 0) w -= V * (V.transpose() * w);
      if (out.cols() > 0) w -= out * (out.transpose() * w);
    }
    const double n1 = w.norm();
    if (!(n1 > 1e-8 * n0)) continue;
    out.conservativeResize(Eigen::NoChange, out.cols() + 1);
    out.col(out.cols() - 1) = w / n1;
  }
  return out;
}

// Number of condensed eigenvalues below sigma: by Sylvester's law of inertia this is
// the number of negative pivots of K - sigma diag(I, 0), since A_FF is positive definite.
inline Index count_below(const BlockSystem& sys, double sigma) {
  SpMat M = sys.K;
  for (Index i = 0; i < sys.N; ++i) M.coeffRef(i, i) -= sigma;
  Eigen::SimplicialLDLT<SpMat> f(M);
  if (f.info() != Eigen::Success) return -1;
  return static_cast<Index>((f.vectorD().array() < 0.0).count());
}

inline EigenResult solve_dense(const BlockSystem& sys, int j_max) {
  const Eigen::MatrixXd S = condense(sys);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success) throw std::runtime_error("solve_evp: dense eigensolver failed");
  return finish(sys, es.eigenvalues().head(j_max), es.eigenvectors().leftCols(j_max), "dense");
}

// Shift-invert block Krylov method for the Schur complement S. The basis lives on
// the cell unknowns only: S^{-1} y is the cell part of K^{-1} [y; 0], and S v is
// A_TT v + A_TF x_F with the face part x_F recovered exactly from v.
inline EigenResult krylov_attempt(const BlockSystem& sys, const Eigen::SimplicialLDLT<SpMat>& kfac, int j_max,
                                  int b, const EigenOptions& opt) {
  const Index N = sys.N, n = sys.ndof();
  auto apply_inverse = [&](const Eigen::MatrixXd& Y) {
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, Y.cols());
    rhs.topRows(N) = Y;
    return Eigen::MatrixXd(Eigen::MatrixXd(kfac.solve(rhs)).topRows(N));
  };
  auto apply_schur = [&](const Eigen::MatrixXd& W) {
    Eigen::MatrixXd SW = sys.A_TT * W;
    if (sys.face_dofs() > 0) {
      const Eigen::MatrixXd rhs = -(sys.A_TF.transpose() * W);
      SW += sys.A_TF * Eigen::MatrixXd(sys.A_FF_factor->solve(rhs));
    }
    return SW;
  };
  std::mt19937_64 rng(opt.seed + static_cast<unsigned>(b));
  std::normal_distribution<double> normal;
  Eigen::MatrixXd Y(N, b);
  for (Eigen::Index i = 0; i < Y.size(); ++i) Y.data()[i] = normal(rng);

  Eigen::VectorXd lam;
  Eigen::MatrixXd X;
  double previous = std::numeric_limits<double>::infinity();
  for (int cycle = 0; cycle < opt.max_restarts; ++cycle) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd V(N, 0), SV(N, 0);
    for (int step = 0; step < opt.blocks_per_cycle; ++step) {
      const Eigen::MatrixXd W = orthonormalize_block(V, apply_inverse(Y));
      if (W.cols() == 0) break;
      const Eigen::MatrixXd SW = apply_schur(W);
      V.conservativeResize(Eigen::NoChange, V.cols() + W.cols());
      V.rightCols(W.cols()) = W;
      SV.conservativeResize(Eigen::NoChange, SV.cols() + W.cols());
      SV.rightCols(W.cols()) = SW;
      Y = W;
      if (V.cols() < j_max) continue;

      Eigen::MatrixXd H = V.transpose() * SV;
      H = 0.5 * (H + H.transpose()).eval();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
      lam = es.eigenvalues().head(j_max);
      const Eigen::MatrixXd C = es.eigenvectors().leftCols(std::min<Eigen::Index>(b, V.cols()));
      X = V * C;
      const Eigen::MatrixXd SX = SV * C;
      double worst = 0.0;
      for (int j = 0; j < j_max; ++j) worst = std::max(worst, (SX.col(j) - lam(j) * X.col(j)).norm());
      if (worst <= 0.1 * opt.tolerance) return finish(sys, lam, X.leftCols(j_max), "krylov");
      best = std::min(best, worst);
      if (V.cols() + b > N) break;
    }
    if (X.cols() == 0) break;
    // stop once a whole cycle brings no real progress (roundoff floor)
    if (!(best < 0.5 * previous)) break;
    previous = best;
    Y = X;
  }
  if (X.cols() == 0) throw std::runtime_error("solve_evp: Krylov iteration produced no subspace");
  return finish(sys, lam, X.leftCols(j_max), "krylov");
}

inline EigenResult solve_krylov(const BlockSystem& sys, int j_max, const EigenOptions& opt) {
  Eigen::SimplicialLDLT<SpMat> kfac(sys.K);
  if (kfac.info() != Eigen::Success || (kfac.vectorD().array() <= 0.0).any())
    throw std::runtime_error("solve_evp: global matrix is not positive definite");
  for (Index b = j_max + 4;; b *= 2) {
    b = std::min(b, sys.N);
    EigenResult res = krylov_attempt(sys, kfac, j_max, static_cast<int>(b), opt);
    // Ritz values are upper bounds; an eigenvalue skipped inside a cluster shows up
    // as an extra negative pivot just below the largest one
    const double top = res.eigenvalues(j_max - 1);
    const double sigma = top * (1 - 1e-8) - 10 * opt.tolerance;
    if (res.residuals.maxCoeff() <= opt.tolerance && count_below(sys, sigma) <= j_max - 1) return res;
    if (b == sys.N) break;
  }
  if (sys.N <= opt.dense_fallback_limit) {
    EigenResult res = solve_dense(sys, j_max);
    res.method = "dense-fallback";
    if (res.residuals.maxCoeff() <= opt.tolerance) return res;
  }
  throw std::runtime_error("solve_evp: eigensolver did not reach the residual tolerance");
}

}  // namespace detail

/// The j_max smallest eigenpairs of the condensed pencil.
inline EigenResult solve_evp(const BlockSystem& sys, int j_max, const EigenOptions& opt = {}) {
  if (j_max < 1) throw std::invalid_argument("solve_evp: j_max must be positive");
  if (j_max > sys.N)
    throw std::invalid_argument("solve_evp: eigenvalue index " + std::to_string(j_max) +
                                " exceeds N = " + std::to_string(sys.N) + " (not representable)");
  if (sys.N <= opt.dense_limit) {
    EigenResult res = detail::solve_dense(sys, j_max);
    if (!(res.residuals.maxCoeff() <= opt.tolerance))
      throw std::runtime_error("solve_evp: dense eigensolver residual above tolerance");
    return res;
  }
  return detail::solve_krylov(sys, j_max, opt);
}

/// Dense generalized eigenvalues of a symmetric pencil (A, B) with B positive definite.
inline Eigen::VectorXd dense_pencil_eigenvalues(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("dense_pencil_eigenvalues: failed");
  return es.eigenvalues();
}

struct GLBEntry {
  int j = 0;
  double lambda_h = 0.0;
  double glb = 0.0;
  bool condition_met = false;
};

struct GLBReport {
  std::vector<GLBEntry> entries;
  double h_max = 0.0;
  Params params;
};

/// sigma_2^2 max{beta, h_max^2 lambda_h} <= alpha.
inline bool glb_condition(double lambda_h, double h_max, const Params& prm) {
  return prm.beta_admissible() && prm.sigma2_sq() * h_max * h_max * lambda_h <= prm.alpha;
}

inline GLBReport glb_check(const Eigen::VectorXd& eigenvalues, double h_max, const Params& prm) {
  GLBReport rep;
  rep.h_max = h_max;
  rep.params = prm;
  for (Eigen::Index j = 0; j < eigenvalues.size(); ++j) {
    GLBEntry e;
    e.j = static_cast<int>(j + 1);
    e.lambda_h = eigenvalues(j);
    e.condition_met = glb_condition(e.lambda_h, h_max, prm);
    e.glb = e.condition_met ? e.lambda_h : 0.0;
    rep.entries.push_back(e);
  }
  return rep;
}

inline GLBReport glb_check(const EigenResult& eig, double h_max, const Params& prm) {
  return glb_check(eig.eigenvalues, h_max, prm);
}

}  // namespace hhoglb
