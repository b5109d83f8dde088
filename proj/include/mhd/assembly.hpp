#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <vector>

#include "mhd/derham.hpp"
#include "mhd/linalg.hpp"

namespace mhd {

class AssemblyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class FormId {
  grad_grad,
  vec_mass,
  curl_mass_pairing,
  weak_curl_pairing,
  div_scalar,
  div_pressure,
  convection_skew,
  ohm_cross,
  lorentz_cross,
  divdiv,
  load_vector,
};

const char* to_string(FormId id);

/// Quadrature degree per form family.
struct QuadDegrees {
  int fluid = 4;
  int pairing = 3;
  int convection = 5;
  int cross = 6;
  int load = 6;
  int measure = 6;
};

/// Default degree of `id`: exact for the integrand on affine cells.
int default_quad_degree(FormId id, const QuadDegrees& q = {});

/// A bilinear form. Rows are the free DOFs of `test`, columns the free DOFs of `trial`.
///   grad_grad          (grad u, grad v)               test = trial, P1 or P2 vector
///   vec_mass           (u, v)                          test = trial
///   curl_mass_pairing  (B, curl F)                     test curl space, trial div space
///   weak_curl_pairing  (curl E, C)                     test div space, trial curl space
///   div_scalar         (div B, s)                      test dg0, trial div space
///   div_pressure       (div u, q)                      test pressure, trial velocity
///   convection_skew    (1/2)[((w.grad)u,v) - ((w.grad)v,u)]   needs w
///   ohm_cross          (u x b, F)                      test curl space, trial velocity, needs b
///   lorentz_cross      (z, v x b)                      test velocity, trial curl space or velocity, needs b
///   divdiv             (div B, div C)                  test = trial div space
struct FormSpec {
  FormId id = FormId::vec_mass;
  SpacePtr test;
  SpacePtr trial;
  const FieldFunction* w = nullptr;
  const FieldFunction* b = nullptr;
  /// 0 selects default_quad_degree.
  int quad_degree = 0;
};

SparseMatrix assemble_bilinear(const FormSpec& form);

/// Source evaluated at a point of a cell; used for analytic and discrete right-hand sides alike.
using CellField = std::function<Vec3(int cell, const std::array<double, 4>& lambda, const Vec3& x)>;

/// (f, v) over the free DOFs of a vector space.
std::vector<double> assemble_linear(const VectorFn& f, const FeSpace& space, int quad_degree);
std::vector<double> assemble_linear(const CellField& f, const FeSpace& space, int quad_degree);
/// (f, q) over the free DOFs of a scalar space.
std::vector<double> assemble_linear(const ScalarFn& f, const FeSpace& space, int quad_degree);

}  // namespace mhd
