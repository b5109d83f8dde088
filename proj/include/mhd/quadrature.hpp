#pragma once

#include <array>
#include <stdexcept>
#include <vector>

namespace mhd {

/// Rule on the reference tetrahedron, points in barycentric coordinates, weights summing to 1/6.
struct QuadratureRule {
  int degree = 0;
  std::vector<std::array<double, 4>> points;
  std::vector<double> weights;

  int size() const { return static_cast<int>(weights.size()); }
};

/// Rule on the reference triangle, barycentric points, weights summing to 1/2.
struct TriangleRule {
  int degree = 0;
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
};

/// Gauss-Legendre on [0,1], weights summing to 1.
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
};

inline constexpr int kMaxQuadratureDegree = 8;

/// Positive-weight rule exact to `degree` (1..kMaxQuadratureDegree). Degree 1 is the centroid rule,
/// degree 2 the symmetric 4-point rule, higher degrees are collapsed Gauss-Jacobi products.
/// Throws std::invalid_argument for unsupported degrees. The returned reference stays valid.
const QuadratureRule& quadrature_rule(int degree);

const TriangleRule& triangle_rule(int degree);

LineRule gauss_legendre(int num_points);

/// Gauss-Jacobi nodes/weights on [0,1] for the weight (1-x)^alpha.
LineRule gauss_jacobi(int num_points, int alpha);

}  // namespace mhd
