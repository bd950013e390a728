// Solve-estimate-mark-refine loop with the uniform fallback, and its history.
//
// Each iteration solves for lambda_h(j), checks the certificate and evaluates
// the estimator. The adaptive mode bisects a Doerfler set only when the
// certificate holds and refines uniformly otherwise. The loop ends before
// solving on a mesh with more than max_ndof unknowns.
#pragma once

#include "hhoglb/estimator.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hhoglb {

enum class RefineMode { Uniform, Adaptive };

struct LoopConfig {
  int p = 0;
  Params params = Params::make();
  int target_index = 1;
  RefineMode mode = RefineMode::Adaptive;
  double theta = 0.5;
  Index max_ndof = 50000;
  EigenOptions eig;
};

struct HistoryRow {
  Index ndof = 0;
  Index num_triangles = 0;
  double h_max = 0.0;
  double lambda_h = 0.0;
  double glb = 0.0;
  bool condition_met = false;
  double eta_sq = 0.0;
  double residual = 0.0;
  /// Refinement applied after this iteration: "adaptive" or "uniform".
  std::string refine_mode;
  IdentityCheck identities;
};

struct ConvergenceHistory {
  std::vector<HistoryRow> rows;
  Mesh final_mesh;
  /// Uniform refinements done before solving because N < target_index.
  int skipped_levels = 0;
};

inline ConvergenceHistory adaptive_loop(Mesh mesh, const LoopConfig& cfg) {
  cfg.params.validate();
  if (cfg.p < 0) throw std::invalid_argument("adaptive_loop: negative degree");
  if (cfg.target_index < 1) throw std::invalid_argument("adaptive_loop: target index must be positive");
  ConvergenceHistory hist;
  const int j = cfg.target_index;
  while (true) {
    const DofMap dm(mesh, cfg.p);
    if (dm.ndof() > cfg.max_ndof) break;
    if (dm.N() < j) {
      // lambda_h(j) is not representable on this mesh
      mesh = uniform_refine(mesh);
      ++hist.skipped_levels;
      continue;
    }
    const BlockSystem sys = assemble(mesh, cfg.p, cfg.params);
    const EigenResult eig = solve_evp(sys, j, cfg.eig);
    const GLBReport rep = glb_check(eig, sys.h_max, cfg.params);
    const GLBEntry& entry = rep.entries[j - 1];
    const HHOVector& u = eig.eigenvectors[j - 1];
    const PiecewiseField ph = compute_ph(sys, mesh, u);
    const Indicators ind = estimate(mesh, ph, u, entry.lambda_h);

    HistoryRow row;
    row.ndof = sys.ndof();
    row.num_triangles = mesh.num_triangles();
    row.h_max = sys.h_max;
    row.lambda_h = entry.lambda_h;
    row.glb = entry.glb;
    row.condition_met = entry.condition_met;
    row.eta_sq = ind.total;
    row.residual = eig.residuals(j - 1);
    row.identities = verify_A1_A2(mesh, ph, u, entry.lambda_h);
    const bool adapt = cfg.mode == RefineMode::Adaptive && entry.condition_met;
    row.refine_mode = adapt ? "adaptive" : "uniform";
    hist.rows.push_back(row);

    mesh = adapt ? bisect(mesh, mark_doerfler(ind, cfg.theta)) : uniform_refine(mesh);
  }
  hist.final_mesh = std::move(mesh);
  return hist;
}

inline void write_history_csv(std::ostream& os, const ConvergenceHistory& hist) {
  const auto old_flags = os.flags();
  const auto old_prec = os.precision();
  os << "ndof,hmax,lambda_h,glb,eta_sq,refine_mode\n";
  os << std::setprecision(17);
  for (const HistoryRow& r : hist.rows)
    os << r.ndof << ',' << r.h_max << ',' << r.lambda_h << ',' << r.glb << ',' << r.eta_sq << ','
       << r.refine_mode << '\n';
  os.flags(old_flags);
  os.precision(old_prec);
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need two points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace hhoglb
