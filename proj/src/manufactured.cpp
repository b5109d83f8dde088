#include "mhd/manufactured.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "mhd/derham.hpp"

namespace mhd {

namespace {

/// Univariate factor with derivatives up to third order.
using Factor = std::function<std::array<double, 4>(double)>;

/// Product a(x) b(y) c(z) with mixed partial derivatives.
struct Separable {
  Factor a, b, c;

  double d(const Vec3& p, int i, int j, int k) const { return a(p.x)[i] * b(p.y)[j] * c(p.z)[k]; }

  Vec3 grad(const Vec3& p) const { return {d(p, 1, 0, 0), d(p, 0, 1, 0), d(p, 0, 0, 1)}; }

  Mat3 hessian(const Vec3& p) const {
    Mat3 h;
    h[0] = {d(p, 2, 0, 0), d(p, 1, 1, 0), d(p, 1, 0, 1)};
    h[1] = {d(p, 1, 1, 0), d(p, 0, 2, 0), d(p, 0, 1, 1)};
    h[2] = {d(p, 1, 0, 1), d(p, 0, 1, 1), d(p, 0, 0, 2)};
    return h;
  }
};

std::array<double, 4> bubble_squared(double t) {
  return {t * t * (1 - t) * (1 - t), 2 * t - 6 * t * t + 4 * t * t * t, 2 - 12 * t + 12 * t * t, -12 + 24 * t};
}

std::array<double, 4> bubble(double t) { return {t * (1 - t), 1 - 2 * t, -2.0, 0.0}; }

std::array<double, 4> cosine(double t) {
  constexpr double pi = std::numbers::pi;
  return {std::cos(pi * t), -pi * std::sin(pi * t), -pi * pi * std::cos(pi * t), pi * pi * pi * std::sin(pi * t)};
}

/// Fields curl(0,0,chi) = (chi_y, -chi_x, 0) scaled by lambda.
struct StreamField {
  Separable chi;
  double lambda;

  Vec3 value(const Vec3& p) const { return lambda * Vec3{chi.d(p, 0, 1, 0), -chi.d(p, 1, 0, 0), 0.0}; }
  Mat3 grad(const Vec3& p) const {
    Mat3 g;
    g[0] = lambda * Vec3{chi.d(p, 1, 1, 0), chi.d(p, 0, 2, 0), chi.d(p, 0, 1, 1)};
    g[1] = -lambda * Vec3{chi.d(p, 2, 0, 0), chi.d(p, 1, 1, 0), chi.d(p, 1, 0, 1)};
    return g;
  }
  Vec3 laplace(const Vec3& p) const {
    return lambda * Vec3{chi.d(p, 2, 1, 0) + chi.d(p, 0, 3, 0) + chi.d(p, 0, 1, 2),
                         -(chi.d(p, 3, 0, 0) + chi.d(p, 1, 2, 0) + chi.d(p, 1, 0, 2)), 0.0};
  }
};

}  // namespace

ManufacturedCase builtin_case(BcFamily family, double lambda, const MhdParams& params) {
  constexpr double pi = std::numbers::pi;
  ManufacturedCase mc;
  mc.family = family;
  mc.lambda = lambda;
  mc.params = params;

  const StreamField vel{Separable{bubble_squared, bubble_squared, bubble_squared}, lambda};
  mc.u = [vel](const Vec3& p) { return vel.value(p); };
  mc.grad_u = [vel](const Vec3& p) { return vel.grad(p); };
  mc.laplace_u = [vel](const Vec3& p) { return vel.laplace(p); };
  mc.p = [lambda](const Vec3& p) { return lambda * (std::sin(pi * p.x) - 2.0 / pi); };
  mc.grad_p = [lambda](const Vec3& p) { return Vec3{lambda * pi * std::cos(pi * p.x), 0.0, 0.0}; };

  if (family == BcFamily::normal_B) {
    mc.B = [lambda](const Vec3& p) {
      return lambda * pi * Vec3{std::sin(pi * p.x) * std::cos(pi * p.y), -std::cos(pi * p.x) * std::sin(pi * p.y), 0.0};
    };
    mc.grad_B = [lambda](const Vec3& p) {
      const double sx = std::sin(pi * p.x), cx = std::cos(pi * p.x);
      const double sy = std::sin(pi * p.y), cy = std::cos(pi * p.y);
      Mat3 g;
      g[0] = lambda * pi * pi * Vec3{cx * cy, -sx * sy, 0.0};
      g[1] = lambda * pi * pi * Vec3{sx * sy, -cx * cy, 0.0};
      return g;
    };
    const Separable phi{bubble, bubble, bubble};
    mc.E = [phi, lambda](const Vec3& p) { return lambda * phi.grad(p); };
    mc.grad_E = [phi, lambda](const Vec3& p) {
      Mat3 h = phi.hessian(p);
      for (auto& r : h.row) r *= lambda;
      return h;
    };
  } else {
    mc.B = mc.u;
    mc.grad_B = mc.grad_u;
    const Separable psi{cosine, cosine, cosine};
    mc.E = [psi, lambda](const Vec3& p) { return lambda * psi.grad(p); };
    mc.grad_E = [psi, lambda](const Vec3& p) {
      Mat3 h = psi.hessian(p);
      for (auto& r : h.row) r *= lambda;
      return h;
    };
  }
  const MatrixFn grad_b = mc.grad_B;
  mc.curl_B = [grad_b](const Vec3& p) { return curl_of(grad_b(p)); };

  const VectorFn u = mc.u, b = mc.B, e = mc.E, lap = mc.laplace_u, gp = mc.grad_p, cb = mc.curl_B;
  const MatrixFn gu = mc.grad_u;
  mc.j = [u, b, e](const Vec3& p) { return e(p) + cross(u(p), b(p)); };
  const VectorFn j = mc.j;
  const double re = params.Re, rm = params.Rm, s = params.s;
  mc.f = [=](const Vec3& p) {
    const Vec3 up = u(p);
    return gu(p).apply(up) - (1.0 / re) * lap(p) - s * cross(j(p), b(p)) + gp(p);
  };
  mc.g = [=](const Vec3& p) { return s * (j(p) - (1.0 / rm) * cb(p)); };
  return mc;
}

}  // namespace mhd
