#include "mhd/quadrature.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

namespace mhd {

namespace {

/// Jacobi polynomial P_n^{(a,b)}(x) and its derivative by the three-term recurrence.
std::pair<double, double> jacobi_with_derivative(int n, double a, double b, double x) {
  auto eval = [](int m, double al, double be, double t) {
    if (m == 0) return 1.0;
    double p0 = 1.0;
    double p1 = 0.5 * (al - be + (al + be + 2.0) * t);
    for (int k = 2; k <= m; ++k) {
      const double k2ab = 2.0 * k + al + be;
      const double a1 = 2.0 * k * (k + al + be) * (k2ab - 2.0);
      const double a2 = (k2ab - 1.0) * (al * al - be * be);
      const double a3 = (k2ab - 2.0) * (k2ab - 1.0) * k2ab;
      const double a4 = 2.0 * (k + al - 1.0) * (k + be - 1.0) * k2ab;
      const double p2 = ((a2 + a3 * t) * p1 - a4 * p0) / a1;
      p0 = p1;
      p1 = p2;
    }
    return p1;
  };
  const double p = eval(n, a, b, x);
  const double dp = n == 0 ? 0.0 : 0.5 * (n + a + b + 1.0) * eval(n - 1, a + 1.0, b + 1.0, x);
  return {p, dp};
}

/// Roots of P_n^{(a,0)} on [-1,1] by Newton with deflation, and the Gauss-Jacobi weights.
LineRule gauss_jacobi_symmetric_interval(int n, double a) {
  const double b = 0.0;
  LineRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = -std::cos(std::numbers::pi * (i + 0.75 + 0.5 * a) / (n + 0.5 + 0.5 * a));
    if (i > 0) x = std::max(x, rule.points[i - 1] + 1e-10);
    for (int it = 0; it < 100; ++it) {
      auto [p, dp] = jacobi_with_derivative(n, a, b, x);
      double deflate = 0.0;
      for (int j = 0; j < i; ++j) deflate += 1.0 / (x - rule.points[j]);
      const double step = p / (dp - deflate * p);
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    rule.points[i] = x;
  }
  const double c = std::pow(2.0, a + b + 1.0) * std::tgamma(n + a + 1.0) * std::tgamma(n + b + 1.0) /
                   (std::tgamma(n + a + b + 1.0) * std::tgamma(n + 1.0));
  for (int i = 0; i < n; ++i) {
    const double x = rule.points[i];
    const double dp = jacobi_with_derivative(n, a, b, x).second;
    rule.weights[i] = c / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

QuadratureRule build_tet_rule(int degree) {
  QuadratureRule rule;
  rule.degree = degree;
  if (degree == 1) {
    rule.points = {{0.25, 0.25, 0.25, 0.25}};
    rule.weights = {1.0 / 6.0};
    return rule;
  }
  if (degree == 2) {
    const double a = 0.5854101966249685;
    const double b = 0.1381966011250105;
    rule.points = {{a, b, b, b}, {b, a, b, b}, {b, b, a, b}, {b, b, b, a}};
    rule.weights.assign(4, 1.0 / 24.0);
    return rule;
  }
  // Collapsed coordinates x = s, y = (1-s) t, z = (1-s)(1-t) w; Jacobian (1-s)^2 (1-t).
  const int m = (degree + 2) / 2;
  const LineRule rs = gauss_jacobi(m, 2);
  const LineRule rt = gauss_jacobi(m, 1);
  const LineRule rw = gauss_legendre(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      for (int k = 0; k < m; ++k) {
        const double s = rs.points[i];
        const double t = rt.points[j];
        const double w = rw.points[k];
        const double x = s;
        const double y = (1.0 - s) * t;
        const double z = (1.0 - s) * (1.0 - t) * w;
        rule.points.push_back({1.0 - x - y - z, x, y, z});
        rule.weights.push_back(rs.weights[i] * rt.weights[j] * rw.weights[k]);
      }
    }
  }
  return rule;
}

TriangleRule build_triangle_rule(int degree) {
  TriangleRule rule;
  rule.degree = degree;
  const int m = (degree + 2) / 2;
  const LineRule rs = gauss_jacobi(m, 1);
  const LineRule rt = gauss_legendre(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double x = rs.points[i];
      const double y = (1.0 - x) * rt.points[j];
      rule.points.push_back({1.0 - x - y, x, y});
      rule.weights.push_back(rs.weights[i] * rt.weights[j]);
    }
  }
  return rule;
}

void check_degree(int degree) {
  if (degree < 1 || degree > kMaxQuadratureDegree) {
    throw std::invalid_argument("unsupported quadrature degree " + std::to_string(degree));
  }
}

}  // namespace

LineRule gauss_jacobi(int num_points, int alpha) {
  LineRule sym = gauss_jacobi_symmetric_interval(num_points, alpha);
  const double scale = std::pow(2.0, -alpha - 1.0);
  for (int i = 0; i < num_points; ++i) {
    sym.points[i] = 0.5 * (1.0 + sym.points[i]);
    sym.weights[i] *= scale;
  }
  return sym;
}

LineRule gauss_legendre(int num_points) { return gauss_jacobi(num_points, 0); }

const QuadratureRule& quadrature_rule(int degree) {
  check_degree(degree);
  static std::once_flag flag;
  static std::vector<QuadratureRule> rules;
  std::call_once(flag, [] {
    for (int d = 1; d <= kMaxQuadratureDegree; ++d) rules.push_back(build_tet_rule(d));
  });
  return rules[degree - 1];
}

const TriangleRule& triangle_rule(int degree) {
  check_degree(degree);
  static std::once_flag flag;
  static std::vector<TriangleRule> rules;
  std::call_once(flag, [] {
    for (int d = 1; d <= kMaxQuadratureDegree; ++d) rules.push_back(build_triangle_rule(d));
  });
  return rules[degree - 1];
}

}  // namespace mhd
