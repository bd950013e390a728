// Helpers shared by the unit tests.
#pragma once

#include "hhoglb/hhoglb.hpp"

#include <cmath>
#include <numeric>
#include <random>

namespace testing_support {

using hhoglb::Vec2;

/// Random counter-clockwise triangle with all angles above min_angle (radians).
inline std::array<Vec2, 3> random_triangle(std::mt19937& rng, double min_angle = 0.3) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  while (true) {
    std::array<Vec2, 3> v{Vec2(u(rng), u(rng)), Vec2(u(rng), u(rng)), Vec2(u(rng), u(rng))};
    const double a = hhoglb::detail::signed_area(v[0], v[1], v[2]);
    if (a < 0) std::swap(v[1], v[2]);
    double smallest = 10.0;
    for (int k = 0; k < 3; ++k) {
      const Vec2 e1 = v[(k + 1) % 3] - v[k], e2 = v[(k + 2) % 3] - v[k];
      smallest = std::min(smallest, std::acos(e1.dot(e2) / (e1.norm() * e2.norm())));
    }
    if (smallest > min_angle) return v;
  }
}

/// Polynomial sum c_ab x^a y^b of total degree <= m with random coefficients, and its gradient.
struct RandomPolynomial {
  int m = 0;
  std::vector<double> c;

  RandomPolynomial(std::mt19937& rng, int degree) : m(degree) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int a = 0; a <= m; ++a)
      for (int b = 0; a + b <= m; ++b) c.push_back(u(rng));
  }
  double operator()(const Vec2& x) const {
    double s = 0.0;
    int i = 0;
    for (int a = 0; a <= m; ++a)
      for (int b = 0; a + b <= m; ++b) s += c[i++] * std::pow(x(0), a) * std::pow(x(1), b);
    return s;
  }
  Vec2 grad(const Vec2& x) const {
    Vec2 g = Vec2::Zero();
    int i = 0;
    for (int a = 0; a <= m; ++a)
      for (int b = 0; a + b <= m; ++b) {
        if (a > 0) g(0) += c[i] * a * std::pow(x(0), a - 1) * std::pow(x(1), b);
        if (b > 0) g(1) += c[i] * b * std::pow(x(0), a) * std::pow(x(1), b - 1);
        ++i;
      }
    return g;
  }
};

/// Composite 5-point Gauss rule on [a, b] with n panels; independent of the library rules.
template <class F>
double composite_gauss(F f, double a, double b, int n) {
  static const double xs[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                               0.9061798459386640};
  static const double ws[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                               0.4786286704993665, 0.2369268850561891};
  const double h = (b - a) / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double mid = a + (i + 0.5) * h;
    for (int k = 0; k < 5; ++k) s += ws[k] * f(mid + 0.5 * h * xs[k]);
  }
  return 0.5 * h * s;
}

/// Integral over a triangle by a tensor composite rule on the collapsed square
/// (Duffy map), independent of the library's triangle rules.
template <class F>
double duffy_integral(F f, const std::array<Vec2, 3>& T, int n = 8) {
  const double area2 = std::abs((T[1] - T[0])(0) * (T[2] - T[0])(1) - (T[1] - T[0])(1) * (T[2] - T[0])(0));
  return composite_gauss(
      [&](double s) {
        return composite_gauss(
            [&](double t) {
              const Vec2 x = T[0] + s * (T[1] - T[0]) + (1.0 - s) * t * (T[2] - T[0]);
              return (1.0 - s) * f(x);
            },
            0.0, 1.0, n);
      },
      0.0, 1.0, n) * area2;
}

}  // namespace testing_support
