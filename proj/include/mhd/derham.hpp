#pragma once

#include <array>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mhd/geometry.hpp"
#include "mhd/linalg.hpp"
#include "mhd/mesh.hpp"

namespace mhd {

class SpaceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Affine cell data: vertex coordinates, barycentric gradients, volume.
struct CellGeometry {
  std::array<Vec3, 4> x;
  std::array<Vec3, 4> grad_lambda;
  double volume = 0.0;

  Vec3 point(const std::array<double, 4>& lambda) const {
    return lambda[0] * x[0] + lambda[1] * x[1] + lambda[2] * x[2] + lambda[3] * x[3];
  }
};

CellGeometry cell_geometry(const Mesh& mesh, int cell);

/// Mesh, its topology and per-cell geometry; shared by every space built over it.
struct Domain {
  Mesh mesh;
  MeshTopology topology;
  std::vector<CellGeometry> geometry;

  int num_cells() const { return mesh.num_cells(); }
  double total_volume() const;
};

std::shared_ptr<const Domain> make_domain(Mesh mesh);

enum class SpaceKind { lagrange_p1, lagrange_p2_vector, lagrange_p1_pressure, nedelec1_lowest, rt_lowest, dg0 };
enum class BoundaryCondition { none, essential_zero };

const char* to_string(SpaceKind kind);

/// One basis function (or field) evaluated at a point: the value and its Jacobian.
/// Scalar spaces store the value in `value.x` and the gradient in `jacobian[0]`.
struct BasisEval {
  Vec3 value;
  Mat3 jacobian;
};

inline Vec3 curl_of(const Mat3& j) { return {j[2].y - j[1].z, j[0].z - j[2].x, j[1].x - j[0].y}; }
inline double div_of(const Mat3& j) { return j.trace(); }

class FeSpace {
 public:
  FeSpace(SpaceKind kind, BoundaryCondition bc, std::shared_ptr<const Domain> domain, bool mean_constraint);

  SpaceKind kind() const { return kind_; }
  BoundaryCondition bc() const { return bc_; }
  bool mean_constraint() const { return mean_constraint_; }
  bool is_vector() const;
  const Domain& domain() const { return *domain_; }
  const std::shared_ptr<const Domain>& domain_ptr() const { return domain_; }

  int num_dofs() const { return static_cast<int>(free_index_.size()); }
  int num_free() const { return static_cast<int>(free_dofs_.size()); }
  /// Free-DOF number of a global DOF, -1 when constrained.
  int free_index(int dof) const { return free_index_[dof]; }
  const std::vector<int>& free_dofs() const { return free_dofs_; }
  std::vector<int> constrained_dofs() const;

  int local_size() const;
  /// Global DOFs of `cell` in local basis order and the orientation sign of each.
  void cell_dofs(int cell, std::span<int> dofs, std::span<double> signs) const;

  /// Free-DOF vector to full coefficient vector (constrained entries zero) and back.
  std::vector<double> extend(std::span<const double> free) const;
  std::vector<double> restrict_to_free(std::span<const double> full) const;

  /// Border weights of the zero-mean constraint over free DOFs: the integral of each basis function.
  std::vector<double> mean_weights() const;

 private:
  SpaceKind kind_;
  BoundaryCondition bc_;
  bool mean_constraint_;
  std::shared_ptr<const Domain> domain_;
  std::vector<int> free_index_;
  std::vector<int> free_dofs_;
};

using SpacePtr = std::shared_ptr<const FeSpace>;

/// Throws SpaceError for essential conditions on dg0/pressure spaces or a mean constraint on
/// anything other than dg0/pressure.
SpacePtr make_space(SpaceKind kind, BoundaryCondition bc, std::shared_ptr<const Domain> domain,
                    bool mean_constraint = false);

/// Local basis of `space` on `cell` at one barycentric point, signs applied.
void evaluate_basis(const FeSpace& space, int cell, const std::array<double, 4>& lambda, std::span<BasisEval> out);

struct BasisTable {
  int num_points = 0;
  int num_basis = 0;
  std::vector<int> dofs;
  std::vector<BasisEval> data;

  const BasisEval& at(int point, int basis) const { return data[point * num_basis + basis]; }
};

/// Physical basis values and Jacobians at barycentric reference points.
BasisTable tabulate(const FeSpace& space, int cell, std::span<const std::array<double, 4>> points);

/// Scalar quadratic Lagrange basis: vertex functions then edge functions in kLocalEdges order.
void p2_scalar_basis(const CellGeometry& g, const std::array<double, 4>& l, std::array<double, 10>& n,
                     std::array<Vec3, 10>& dn);

/// Full coefficient vector over a space, indexed by global DOF.
struct FieldFunction {
  SpacePtr space;
  std::vector<double> coeffs;

  static FieldFunction zero(SpacePtr space);
  static FieldFunction from_free(SpacePtr space, std::span<const double> free);
  std::vector<double> free_coeffs() const { return space->restrict_to_free(coeffs); }

  BasisEval evaluate(int cell, const std::array<double, 4>& lambda) const;
};

/// Degrees of freedom of the canonical interpolants.
FieldFunction canonical_interpolate(SpacePtr space, const VectorFn& field);
FieldFunction canonical_interpolate(SpacePtr space, const ScalarFn& field);

/// Subtracts the volume-weighted mean of a dg0 or scalar P1 field.
FieldFunction zero_mean_project(const FieldFunction& field);
double field_mean(const FieldFunction& field);

/// Integer incidence matrices over all DOFs: edges x vertices, faces x edges, cells x faces.
SparseMatrix incidence_grad(const MeshTopology& topo);
SparseMatrix incidence_curl(const MeshTopology& topo);
SparseMatrix incidence_div(const MeshTopology& topo);

/// Exterior derivative between consecutive spaces restricted to free DOFs. For rt_lowest -> dg0
/// the rows are scaled by 1/|T| so that it maps interpolants of v to cell averages of div v.
SparseMatrix exterior_derivative(const FeSpace& from, const FeSpace& to);

}  // namespace mhd
