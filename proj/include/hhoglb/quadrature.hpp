// Gauss quadrature on the interval and on triangles.
//
// Triangle rules are conical products (Stroud): Gauss-Legendre in the collapsed
// coordinate times Gauss-Jacobi(1,0) in the other, which integrates every
// polynomial of total degree 2n-1 exactly with n*n positive weights.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace hhoglb {

using Vec2 = Eigen::Vector2d;

/// Nodes and weights of a one-dimensional rule on (-1, 1).
struct GaussRule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Quadrature rule on the reference triangle conv{(0,0), (1,0), (0,1)}.
struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int exactness_degree = 0;

  std::size_t size() const { return points.size(); }
};

/// Gauss-Jacobi rule for the weight (1-x)^a (1+x)^b on (-1, 1) with n nodes,
/// computed by the Golub-Welsch eigenvalue method.
inline GaussRule1D gauss_jacobi(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_jacobi: need at least one node");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + a + b;
    if (k == 0)
      jacobi(0, 0) = (b - a) / (a + b + 2.0);
    else
      jacobi(k, k) = (b * b - a * a) / (s * (s + 2.0));
    if (k + 1 < n) {
      const double m = k + 1.0;
      const double t = 2.0 * m + a + b;
      const double off = std::sqrt(4.0 * m * (m + a) * (m + b) * (m + a + b) /
                                   (t * t * (t + 1.0) * (t - 1.0)));
      jacobi(k, k + 1) = off;
      jacobi(k + 1, k) = off;
    }
  }
  const double mu0 = std::pow(2.0, a + b + 1.0) * std::tgamma(a + 1.0) *
                     std::tgamma(b + 1.0) / std::tgamma(a + b + 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  GaussRule1D rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    rule.nodes[k] = es.eigenvalues()(k);
    const double v0 = es.eigenvectors()(0, k);
    rule.weights[k] = mu0 * v0 * v0;
  }
  return rule;
}

/// Gauss-Legendre rule on (-1, 1) exact for polynomials of the given degree.
inline const GaussRule1D& gauss_legendre(int degree) {
  static std::mutex guard;
  static std::map<int, GaussRule1D> cache;
  const int n = std::max(1, (degree + 2) / 2);
  std::lock_guard<std::mutex> lock(guard);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, gauss_jacobi(n, 0.0, 0.0)).first;
  return it->second;
}

inline constexpr int kMaxTriangleDegree = 30;

/// Rule on the reference triangle exact for all polynomials of total degree
/// `degree`; degree 0 and 1 give the centroid rule.
inline const QuadratureRule& quad_rule_triangle(int degree) {
  if (degree < 0 || degree > kMaxTriangleDegree)
    throw std::invalid_argument("quad_rule_triangle: unsupported degree " +
                                std::to_string(degree));
  static std::mutex guard;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(guard);
  auto it = cache.find(degree);
  if (it != cache.end()) return it->second;

  QuadratureRule rule;
  rule.exactness_degree = degree;
  if (degree <= 1) {
    rule.points.push_back(Vec2(1.0 / 3.0, 1.0 / 3.0));
    rule.weights.push_back(0.5);
  } else {
    const int n = (degree + 2) / 2;
    const GaussRule1D gl = gauss_jacobi(n, 0.0, 0.0);
    const GaussRule1D gj = gauss_jacobi(n, 1.0, 0.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double a = gl.nodes[i];
        const double b = gj.nodes[j];
        rule.points.push_back(Vec2(0.25 * (1.0 + a) * (1.0 - b), 0.5 * (1.0 + b)));
        rule.weights.push_back(gl.weights[i] * gj.weights[j] / 8.0);
      }
    }
  }
  return cache.emplace(degree, std::move(rule)).first->second;
}

}  // namespace hhoglb
