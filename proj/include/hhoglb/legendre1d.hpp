// Legendre polynomials on (-1, 1), their antiderivatives and the growth of the
// L2 projection of the antiderivative in the energy seminorm.
#pragma once

#include "hhoglb/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <utility>

namespace hhoglb {

/// L_k(x) by the three-term recurrence.
inline double legendre(int k, double x) {
  if (k < 0) throw std::invalid_argument("legendre: negative degree");
  if (k == 0) return 1.0;
  double lm = 1.0, l = x;
  for (int j = 1; j < k; ++j) {
    const double ln = ((2.0 * j + 1.0) * x * l - j * lm) / (j + 1.0);
    lm = l;
    l = ln;
  }
  return l;
}

/// (L_k(x), L_k'(x)) using L'_{j+1} = L'_{j-1} + (2j+1) L_j.
inline std::pair<double, double> legendre_with_derivative(int k, double x) {
  if (k < 0) throw std::invalid_argument("legendre: negative degree");
  if (k == 0) return {1.0, 0.0};
  double lm = 1.0, l = x, dm = 0.0, d = 1.0;
  for (int j = 1; j < k; ++j) {
    const double ln = ((2.0 * j + 1.0) * x * l - j * lm) / (j + 1.0);
    const double dn = dm + (2.0 * j + 1.0) * l;
    lm = l;
    l = ln;
    dm = d;
    d = dn;
  }
  return {l, d};
}

/// The antiderivative int_{-1}^x L_k = (L_{k+1}(x) - L_{k-1}(x)) / (2k+1), with L_{-1} = -1
/// so that k = 0 gives x + 1.
inline double legendre_antiderivative(int k, double x) {
  if (k < 0) throw std::invalid_argument("legendre_antiderivative: negative degree");
  const double lower = k == 0 ? -1.0 : legendre(k - 1, x);
  return (legendre(k + 1, x) - lower) / (2.0 * k + 1.0);
}

/// ||(Pi_p Lhat_p)'|| / ||Lhat_p'|| = sqrt(p(p-1) / (2(2p+1))) in closed form.
inline double growth_ratio(int p) {
  if (p < 1) throw std::invalid_argument("growth_ratio: need p >= 1");
  return std::sqrt(p * (p - 1.0) / (2.0 * (2.0 * p + 1.0)));
}

/// The same ratio computed numerically: project Lhat_p onto P_p with an
/// orthonormal Legendre basis, differentiate and integrate by Gauss quadrature.
inline double growth_ratio_numeric(int p) {
  if (p < 1) throw std::invalid_argument("growth_ratio_numeric: need p >= 1");
  const GaussRule1D& g = gauss_legendre(2 * p + 2);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(p + 1);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const double f = legendre_antiderivative(p, g.nodes[i]);
    for (int k = 0; k <= p; ++k)
      c(k) += g.weights[i] * f * std::sqrt((2.0 * k + 1.0) / 2.0) * legendre(k, g.nodes[i]);
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    double dproj = 0.0;
    for (int k = 0; k <= p; ++k)
      dproj += c(k) * std::sqrt((2.0 * k + 1.0) / 2.0) * legendre_with_derivative(k, g.nodes[i]).second;
    const double dfull = legendre(p, g.nodes[i]);
    num += g.weights[i] * dproj * dproj;
    den += g.weights[i] * dfull * dfull;
  }
  return std::sqrt(num / den);
}

}  // namespace hhoglb
