#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mhd/assembly.hpp"
#include "mhd/derham.hpp"
#include "mhd/linalg.hpp"

namespace mhd {

/// Integrand evaluated at a quadrature point of a cell.
using CellIntegrand = std::function<double(int cell, const std::array<double, 4>& lambda, const Vec3& x)>;

double integrate(const Domain& domain, int quad_degree, const CellIntegrand& f);

/// Weak curl from a div space into a curl space: (curl_h B, F) = (B, curl F) for all F.
/// With essential conditions on both spaces it is the homogeneous operator, without them the
/// natural-boundary variant.
class DiscreteCurl {
 public:
  DiscreteCurl(SpacePtr div_space, SpacePtr curl_space, int quad_degree = 3);

  const SpacePtr& div_space() const { return div_space_; }
  const SpacePtr& curl_space() const { return curl_space_; }
  /// Curl-space mass matrix and the pairing (B, curl F), rows F.
  const SparseMatrix& mass() const { return mass_; }
  const SparseMatrix& pairing() const { return pairing_; }
  const LuFactorization& mass_lu() const { return lu_; }

  FieldFunction apply(const FieldFunction& b) const;
  std::vector<double> apply_free(std::span<const double> b_free) const;

 private:
  SpacePtr div_space_;
  SpacePtr curl_space_;
  SparseMatrix mass_;
  SparseMatrix pairing_;
  LuFactorization lu_;
};

/// Weak divergence from the curl space into P1: (div_h w, s) = -(w, grad s).
FieldFunction discrete_div(const FieldFunction& w, SpacePtr grad_space);

/// L2 projection onto the curl space, using the factored mass of `curl`.
FieldFunction l2_project_curl(const DiscreteCurl& curl, const CellField& phi, int quad_degree = 6);

/// Taylor-Hood Stokes projection of a velocity with zero trace, given its Jacobian.
struct StokesProjection {
  FieldFunction velocity;
  FieldFunction pressure;
};
StokesProjection stokes_project(const MatrixFn& grad_u, SpacePtr velocity, SpacePtr pressure, int quad_degree = 4);

/// Constrained L2 projection onto discretely divergence-free fields. The multiplier lives in
/// `multiplier`; a mean-constrained multiplier space is bordered.
FieldFunction divfree_l2_project(const VectorFn& b, SpacePtr div_space, SpacePtr multiplier, int quad_degree = 6);

/// (integral of |v|^p)^(1/p); scalar spaces use |value.x|.
double lp_norm(const FieldFunction& field, double p, int quad_degree = 6);
double lp_norm(const Domain& domain, const CellField& field, double p, int quad_degree = 6);

double l2_norm(const FieldFunction& f, int quad_degree = 6);
/// ||grad u|| for Lagrange fields.
double h1_seminorm(const FieldFunction& u, int quad_degree = 4);
double h1_norm(const FieldFunction& u, int quad_degree = 4);
double curl_l2_norm(const FieldFunction& e, int quad_degree = 2);
double div_l2_norm(const FieldFunction& b, int quad_degree = 2);
/// max over cells of |div B|.
double div_max(const FieldFunction& b);

/// ||B||_d^2 = ||B||^2 + ||div B||^2 + ||curl_h B||^2.
double norm_d(const FieldFunction& b, const DiscreteCurl& curl);
double norm_W(const FieldFunction& u, const FieldFunction& b, const DiscreteCurl& curl);
/// ||v||_1^2 + ||curl F||^2 + ||F + v x b_prev||^2 + ||C||^2 + ||div C||^2.
double norm_X(const FieldFunction& v, const FieldFunction& f, const FieldFunction& c, const FieldFunction& b_prev);

}  // namespace mhd
