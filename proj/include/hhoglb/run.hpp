// Driver behind the `solve` command: builds the initial mesh, runs the uniform
// or adaptive loop, prints the certificate table and writes the history CSV.
#pragma once

#include "hhoglb/adaptive.hpp"
#include "hhoglb/domains.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace hhoglb {

struct RunConfig {
  std::string domain = "square";
  std::string mesh_file;  // overrides domain when set
  int p = 0;
  RefineMode mode = RefineMode::Adaptive;
  double theta = 0.5;
  double alpha = 0.5;
  double c_st2 = std::numbers::sqrt2;
  double c_p = 1.0 / (std::numbers::sqrt2 * std::numbers::pi);
  int target_index = 1;
  Index max_ndof = 50000;
  std::optional<double> reference_lambda;
  std::string output;
};

inline Params params_from(const RunConfig& cfg) { return Params::make(cfg.alpha, cfg.c_p, cfg.c_st2); }

inline std::string format_fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

inline void print_parameters(std::ostream& os, const Params& prm) {
  os << "alpha     = " << format_fixed(prm.alpha, 6) << "\n"
     << "C_P       = " << format_fixed(prm.C_P, 6) << "\n"
     << "C_st2     = " << format_fixed(prm.C_st2, 6) << "\n"
     << "sigma2_sq = " << format_fixed(prm.sigma2_sq(), 6) << "\n"
     << "beta      = " << format_fixed(prm.beta, 6) << "\n";
}

/// Returns the process exit status; a failed certificate is reported, not an error.
inline int run(const RunConfig& cfg, std::ostream& os) {
  if (cfg.p < 0 || cfg.p > 4) throw std::invalid_argument("p must be in 0..4");
  if (!(cfg.theta > 0.0 && cfg.theta <= 1.0)) throw std::invalid_argument("theta must lie in (0,1]");
  if (cfg.target_index < 1) throw std::invalid_argument("target index must be positive");
  const Params prm = params_from(cfg);

  Mesh mesh;
  std::optional<double> reference = cfg.reference_lambda;
  std::string name;
  if (!cfg.mesh_file.empty()) {
    std::ifstream in(cfg.mesh_file);
    if (!in) throw std::runtime_error("cannot open mesh file '" + cfg.mesh_file + "'");
    mesh = read_mesh(in);
    name = cfg.mesh_file;
  } else {
    const DomainSpec dom = domain_by_name(cfg.domain);
    mesh = dom.mesh();
    name = dom.name;
    if (!reference) reference = dom.reference_eigenvalue(cfg.target_index);
  }

  os << "domain    = " << name << "\n"
     << "p         = " << cfg.p << "\n"
     << "mode      = " << (cfg.mode == RefineMode::Adaptive ? "adaptive" : "uniform") << "\n"
     << "j         = " << cfg.target_index << "\n";
  print_parameters(os, prm);

  LoopConfig lc;
  lc.p = cfg.p;
  lc.params = prm;
  lc.target_index = cfg.target_index;
  lc.mode = cfg.mode;
  lc.theta = cfg.theta;
  lc.max_ndof = cfg.max_ndof;
  const ConvergenceHistory hist = adaptive_loop(mesh, lc);

  if (hist.skipped_levels > 0)
    os << "lambda_h(" << cfg.target_index << ") not representable on the first " << hist.skipped_levels
       << " mesh level(s) (N < j); refined uniformly\n";
  if (hist.rows.empty()) {
    os << "no mesh within max_ndof = " << cfg.max_ndof << " can represent lambda_h(" << cfg.target_index
       << ")\n";
  } else {
    os << "\n" << std::setw(10) << "ndof" << std::setw(14) << "h_max" << std::setw(22) << "lambda_h"
       << std::setw(22) << "GLB" << std::setw(6) << "cert" << std::setw(14) << "eta^2";
    if (reference) os << std::setw(14) << "ref - GLB";
    os << "\n";
    for (const HistoryRow& r : hist.rows) {
      os << std::setw(10) << r.ndof << std::setw(14) << std::setprecision(6) << r.h_max << std::setw(22)
         << std::setprecision(15) << r.lambda_h << std::setw(22) << r.glb << std::setw(6)
         << (r.condition_met ? "yes" : "no") << std::setw(14) << std::setprecision(6) << r.eta_sq;
      if (reference) os << std::setw(14) << std::setprecision(6) << (*reference - r.glb);
      os << "\n";
    }
    const HistoryRow& last = hist.rows.back();
    os << "\nfinal: lambda_h(" << cfg.target_index << ") = " << std::setprecision(15) << last.lambda_h
       << ", GLB(" << cfg.target_index << ") = " << last.glb
       << (last.condition_met ? " (certified)" : " (condition not met, GLB = 0)") << "\n";
    if (reference)
      os << "reference lambda(" << cfg.target_index << ") = " << std::setprecision(15) << *reference << "\n";
  }
  if (!cfg.output.empty()) {
    std::ofstream out(cfg.output);
    if (!out) throw std::runtime_error("cannot write '" + cfg.output + "'");
    write_history_csv(out, hist);
    os << "history written to " << cfg.output << "\n";
  }
  return 0;
}

}  // namespace hhoglb
