// Command-line front end: solve, stabconst, legendre, mesh-info.
#include "hhoglb/hhoglb.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace hhoglb;

std::array<Vec2, 3> parse_triangle(const std::vector<double>& c) {
  if (c.size() != 6) throw std::invalid_argument("--triangle expects six numbers x0 y0 x1 y1 x2 y2");
  return {Vec2(c[0], c[1]), Vec2(c[2], c[3]), Vec2(c[4], c[5])};
}

Mesh load_mesh(const std::string& domain, const std::string& file) {
  if (file.empty()) return domain_by_name(domain).mesh();
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open mesh file '" + file + "'");
  return read_mesh(in);
}

void set_threads_from_env() {
  if (const char* s = std::getenv("HHOGLB_NUM_THREADS")) {
    const int n = std::atoi(s);
    if (n > 0) Eigen::setNbThreads(n);
  }
}

}  // namespace

int main(int argc, char** argv) {
  set_threads_from_env();
  CLI::App app{"Guaranteed lower Dirichlet eigenvalue bounds with hybrid high-order methods"};
  app.require_subcommand(1);

  // solve
  RunConfig rc;
  std::string mode = "adaptive";
  double reference = 0.0;
  auto* solve = app.add_subcommand("solve", "Run the uniform or adaptive eigenvalue loop");
  solve->add_option("--domain", rc.domain, "Built-in domain: square, square2, lshape, isospectral, dumbbell")
      ->capture_default_str();
  solve->add_option("--mesh-file", rc.mesh_file, "Initial mesh in the plain-text format (overrides --domain)");
  solve->add_option("--p", rc.p, "Polynomial degree p (cells carry P_{p+1}, faces P_p)")
      ->check(CLI::Range(0, 4))
      ->capture_default_str();
  solve->add_option("--mode", mode, "Refinement: uniform or adaptive")
      ->check(CLI::IsMember({"uniform", "adaptive"}))
      ->capture_default_str();
  solve->add_option("--theta", rc.theta, "Doerfler bulk parameter")->capture_default_str();
  solve->add_option("--alpha", rc.alpha, "Parameter alpha in (0,1)")->capture_default_str();
  solve->add_option("--c-st2", rc.c_st2, "Stability constant C_st,2")->capture_default_str();
  solve->add_option("--c-p", rc.c_p, "Poincare constant C_P")->capture_default_str();
  solve->add_option("--target-index", rc.target_index, "Eigenvalue index j")->capture_default_str();
  solve->add_option("--max-ndof", rc.max_ndof, "Stop before a mesh with more unknowns")->capture_default_str();
  auto* ref_opt = solve->add_option("--reference-lambda", reference, "Reference eigenvalue for the error column");
  solve->add_option("--output", rc.output, "History CSV path");

  // stabconst
  int sp_min = 1, sp_max = 4, rayleigh = -1;
  FemConfig fem;
  std::vector<double> tri_coords, angles;
  std::string sc_output;
  auto* stab = app.add_subcommand("stabconst", "Stability constants m_p^2 and Rayleigh lower bounds");
  stab->add_option("--p-min", sp_min, "Smallest degree")->capture_default_str();
  stab->add_option("--p-max", sp_max, "Largest degree")->capture_default_str();
  stab->add_option("--triangle", tri_coords, "Vertices x0 y0 x1 y1 x2 y2 (default: right-isosceles)")
      ->expected(6);
  stab->add_option("--angles", angles, "Interior angles in degrees for the isosceles sweep");
  stab->add_option("--fem-degree", fem.degree, "Lagrange degree for (-Delta)^{-1}")->capture_default_str();
  stab->add_option("--fem-refines", fem.refines, "Uniform refinements of T")->capture_default_str();
  stab->add_option("--rayleigh-degree", rayleigh, "Degree N of the Rayleigh quotients (default p+6)");
  stab->add_option("--output", sc_output, "CSV path (default: stdout)");

  // legendre
  int lp_min = 1, lp_max = 50;
  auto* leg = app.add_subcommand("legendre", "Growth ratio of the projected Legendre antiderivative");
  leg->add_option("--p-min", lp_min)->capture_default_str();
  leg->add_option("--p-max", lp_max)->capture_default_str();

  // mesh-info
  std::string mi_domain = "lshape", mi_file, mi_write;
  int mi_refine = 0;
  auto* info = app.add_subcommand("mesh-info", "Mesh statistics, optional refinement and export");
  info->add_option("--domain", mi_domain)->capture_default_str();
  info->add_option("--mesh-file", mi_file);
  info->add_option("--refine", mi_refine, "Uniform refinements before reporting")->capture_default_str();
  info->add_option("--write", mi_write, "Write the mesh in the plain-text format");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) {
      rc.mode = mode == "uniform" ? RefineMode::Uniform : RefineMode::Adaptive;
      if (*ref_opt) rc.reference_lambda = reference;
      return run(rc, std::cout);
    }
    if (*stab) {
      std::ostringstream csv;
      if (!angles.empty()) {
        csv << "omega_deg,p,m_p_sq\n" << std::setprecision(17);
        std::vector<double> omegas;
        for (double a : angles) omegas.push_back(a * std::numbers::pi / 180.0);
        for (int p = sp_min; p <= sp_max; ++p) {
          const auto sweep = angle_sweep(omegas, p, fem);
          for (std::size_t i = 0; i < sweep.size(); ++i) csv << angles[i] << ',' << p << ',' << sweep[i].second << '\n';
        }
      } else {
        const auto T = tri_coords.empty() ? right_isosceles_triangle() : parse_triangle(tri_coords);
        const InverseLaplacian inv(T, fem);
        std::vector<StabConstResult> rows;
        for (int p = sp_min; p <= sp_max; ++p) rows.push_back(compute_mp(T, p, inv, rayleigh));
        write_stabconst_csv(csv, rows);
      }
      if (sc_output.empty()) {
        std::cout << csv.str();
      } else {
        std::ofstream(sc_output) << csv.str();
        std::cout << "written to " << sc_output << "\n";
      }
      return 0;
    }
    if (*leg) {
      std::cout << std::setw(4) << "p" << std::setw(16) << "ratio" << std::setw(16) << "ratio/sqrt(p)"
                << std::setw(16) << "numeric" << "\n";
      for (int p = std::max(1, lp_min); p <= lp_max; ++p) {
        const double r = growth_ratio(p);
        std::cout << std::setw(4) << p << std::setw(16) << std::setprecision(10) << r << std::setw(16)
                  << r / std::sqrt(double(p)) << std::setw(16) << growth_ratio_numeric(p) << "\n";
      }
      return 0;
    }
    if (*info) {
      Mesh m = load_mesh(mi_domain, mi_file);
      for (int r = 0; r < mi_refine; ++r) m = uniform_refine(m);
      std::cout << "vertices        " << m.num_vertices() << "\n"
                << "triangles       " << m.num_triangles() << "\n"
                << "edges           " << m.num_edges() << " (" << m.num_interior_edges() << " interior, "
                << m.num_boundary_edges() << " boundary)\n"
                << std::setprecision(12) << "area            " << m.total_area() << "\n"
                << "h_max           " << m.h_max() << "\n"
                << "min angle (deg) " << min_angle(m) * 180.0 / std::numbers::pi << "\n";
      if (!mi_write.empty()) {
        std::ofstream out(mi_write);
        write_mesh(out, m);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
