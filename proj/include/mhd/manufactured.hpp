#pragma once

#include "mhd/geometry.hpp"
#include "mhd/mhd.hpp"

namespace mhd {

/// Closed-form solution on the unit cube with the sources that make it exact.
struct ManufacturedCase {
  BcFamily family = BcFamily::normal_B;
  double lambda = 0.0;
  MhdParams params;

  VectorFn u;
  MatrixFn grad_u;
  VectorFn laplace_u;
  VectorFn B;
  MatrixFn grad_B;
  VectorFn curl_B;
  VectorFn E;
  MatrixFn grad_E;
  ScalarFn p;
  VectorFn grad_p;
  /// j = E + u x B.
  VectorFn j;
  /// f = (u.grad)u - Re^-1 lap u - s j x B + grad p.
  VectorFn f;
  /// g = s (j - Rm^-1 curl B).
  VectorFn g;

  SourceData sources() const { return {f, g}; }
  /// Same body force without the magnetic source.
  SourceData sources_without_g() const { return {f, VectorFn{}}; }
};

/// normal_B: u = lambda curl(0,0,chi), B = lambda pi (sin pi x cos pi y, -cos pi x sin pi y, 0),
/// E = lambda grad(xyz(1-x)(1-y)(1-z)), p = lambda (sin pi x - 2/pi), chi = (xyz(1-x)(1-y)(1-z))^2.
/// tangential_B: B = lambda curl(0,0,chi) and E = lambda grad(cos pi x cos pi y cos pi z).
ManufacturedCase builtin_case(BcFamily family, double lambda, const MhdParams& params);

}  // namespace mhd
