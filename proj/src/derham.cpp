#include "mhd/derham.hpp"

#include <cmath>

#include "mhd/quadrature.hpp"

namespace mhd {

CellGeometry cell_geometry(const Mesh& mesh, int cell) {
  CellGeometry g;
  g.x = mesh.cell_vertices(cell);
  const Vec3 e1 = g.x[1] - g.x[0];
  const Vec3 e2 = g.x[2] - g.x[0];
  const Vec3 e3 = g.x[3] - g.x[0];
  const double det = triple(e1, e2, e3);
  if (det == 0.0) throw MeshError("degenerate cell " + std::to_string(cell));
  g.grad_lambda[1] = cross(e2, e3) * (1.0 / det);
  g.grad_lambda[2] = cross(e3, e1) * (1.0 / det);
  g.grad_lambda[3] = cross(e1, e2) * (1.0 / det);
  g.grad_lambda[0] = -(g.grad_lambda[1] + g.grad_lambda[2] + g.grad_lambda[3]);
  g.volume = std::abs(det) / 6.0;
  return g;
}

double Domain::total_volume() const {
  double v = 0.0;
  for (const auto& g : geometry) v += g.volume;
  return v;
}

std::shared_ptr<const Domain> make_domain(Mesh mesh) {
  auto d = std::make_shared<Domain>();
  d->topology = build_topology(mesh);
  d->geometry.reserve(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) d->geometry.push_back(cell_geometry(mesh, c));
  d->mesh = std::move(mesh);
  return d;
}

const char* to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::lagrange_p1: return "lagrange_p1";
    case SpaceKind::lagrange_p2_vector: return "lagrange_p2_vector";
    case SpaceKind::lagrange_p1_pressure: return "lagrange_p1_pressure";
    case SpaceKind::nedelec1_lowest: return "nedelec1_lowest";
    case SpaceKind::rt_lowest: return "rt_lowest";
    case SpaceKind::dg0: return "dg0";
  }
  return "unknown";
}

FeSpace::FeSpace(SpaceKind kind, BoundaryCondition bc, std::shared_ptr<const Domain> domain, bool mean_constraint)
    : kind_(kind), bc_(bc), mean_constraint_(mean_constraint), domain_(std::move(domain)) {
  const auto& topo = domain_->topology;
  std::vector<char> constrained;
  switch (kind_) {
    case SpaceKind::lagrange_p1:
    case SpaceKind::lagrange_p1_pressure:
      constrained = topo.boundary_vertex;
      break;
    case SpaceKind::lagrange_p2_vector:
      for (char b : topo.boundary_vertex) constrained.insert(constrained.end(), 3, b);
      for (char b : topo.boundary_edge) constrained.insert(constrained.end(), 3, b);
      break;
    case SpaceKind::nedelec1_lowest:
      constrained = topo.boundary_edge;
      break;
    case SpaceKind::rt_lowest:
      constrained = topo.boundary_face;
      break;
    case SpaceKind::dg0:
      constrained.assign(domain_->num_cells(), 0);
      break;
  }
  free_index_.assign(constrained.size(), -1);
  for (std::size_t i = 0; i < constrained.size(); ++i) {
    if (bc_ == BoundaryCondition::none || !constrained[i]) {
      free_index_[i] = static_cast<int>(free_dofs_.size());
      free_dofs_.push_back(static_cast<int>(i));
    }
  }
}

bool FeSpace::is_vector() const {
  return kind_ == SpaceKind::lagrange_p2_vector || kind_ == SpaceKind::nedelec1_lowest ||
         kind_ == SpaceKind::rt_lowest;
}

std::vector<int> FeSpace::constrained_dofs() const {
  std::vector<int> out;
  for (int i = 0; i < num_dofs(); ++i) {
    if (free_index_[i] < 0) out.push_back(i);
  }
  return out;
}

int FeSpace::local_size() const {
  switch (kind_) {
    case SpaceKind::lagrange_p1:
    case SpaceKind::lagrange_p1_pressure:
    case SpaceKind::rt_lowest:
      return 4;
    case SpaceKind::lagrange_p2_vector:
      return 30;
    case SpaceKind::nedelec1_lowest:
      return 6;
    case SpaceKind::dg0:
      return 1;
  }
  return 0;
}

void FeSpace::cell_dofs(int cell, std::span<int> dofs, std::span<double> signs) const {
  const auto& topo = domain_->topology;
  const auto& t = domain_->mesh.cells[cell];
  switch (kind_) {
    case SpaceKind::lagrange_p1:
    case SpaceKind::lagrange_p1_pressure:
      for (int i = 0; i < 4; ++i) {
        dofs[i] = t[i];
        signs[i] = 1.0;
      }
      break;
    case SpaceKind::lagrange_p2_vector: {
      const int nv = topo.num_vertices();
      for (int node = 0; node < 10; ++node) {
        const int g = node < 4 ? t[node] : nv + topo.cell_edges[cell][node - 4];
        for (int c = 0; c < 3; ++c) {
          dofs[3 * node + c] = 3 * g + c;
          signs[3 * node + c] = 1.0;
        }
      }
      break;
    }
    case SpaceKind::nedelec1_lowest:
      for (int k = 0; k < 6; ++k) {
        dofs[k] = topo.cell_edges[cell][k];
        signs[k] = topo.cell_edge_signs[cell][k];
      }
      break;
    case SpaceKind::rt_lowest:
      for (int k = 0; k < 4; ++k) {
        dofs[k] = topo.cell_faces[cell][k];
        signs[k] = topo.cell_face_signs[cell][k];
      }
      break;
    case SpaceKind::dg0:
      dofs[0] = cell;
      signs[0] = 1.0;
      break;
  }
}

std::vector<double> FeSpace::extend(std::span<const double> free) const {
  if (static_cast<int>(free.size()) != num_free()) throw SpaceError("extend: free vector has wrong size");
  std::vector<double> full(num_dofs(), 0.0);
  for (int i = 0; i < num_free(); ++i) full[free_dofs_[i]] = free[i];
  return full;
}

std::vector<double> FeSpace::restrict_to_free(std::span<const double> full) const {
  if (static_cast<int>(full.size()) != num_dofs()) throw SpaceError("restrict: coefficient vector has wrong size");
  std::vector<double> free(num_free());
  for (int i = 0; i < num_free(); ++i) free[i] = full[free_dofs_[i]];
  return free;
}

std::vector<double> FeSpace::mean_weights() const {
  std::vector<double> full(num_dofs(), 0.0);
  if (kind_ == SpaceKind::dg0) {
    for (int c = 0; c < domain_->num_cells(); ++c) full[c] = domain_->geometry[c].volume;
  } else if (kind_ == SpaceKind::lagrange_p1 || kind_ == SpaceKind::lagrange_p1_pressure) {
    for (int c = 0; c < domain_->num_cells(); ++c) {
      for (int v : domain_->mesh.cells[c]) full[v] += 0.25 * domain_->geometry[c].volume;
    }
  } else {
    throw SpaceError(std::string("mean weights are undefined for ") + to_string(kind_));
  }
  return restrict_to_free(full);
}

SpacePtr make_space(SpaceKind kind, BoundaryCondition bc, std::shared_ptr<const Domain> domain, bool mean_constraint) {
  if (!domain) throw SpaceError("make_space: null domain");
  const bool scalar_l2 = kind == SpaceKind::dg0 || kind == SpaceKind::lagrange_p1_pressure;
  if (scalar_l2 && bc == BoundaryCondition::essential_zero) {
    throw SpaceError(std::string("essential boundary condition is incompatible with ") + to_string(kind));
  }
  if (mean_constraint && !scalar_l2) {
    throw SpaceError(std::string("mean constraint is incompatible with ") + to_string(kind));
  }
  return std::make_shared<const FeSpace>(kind, bc, std::move(domain), mean_constraint);
}

void p2_scalar_basis(const CellGeometry& g, const std::array<double, 4>& l, std::array<double, 10>& n,
                     std::array<Vec3, 10>& dn) {
  for (int i = 0; i < 4; ++i) {
    n[i] = l[i] * (2.0 * l[i] - 1.0);
    dn[i] = (4.0 * l[i] - 1.0) * g.grad_lambda[i];
  }
  for (int e = 0; e < 6; ++e) {
    const int a = kLocalEdges[e][0];
    const int b = kLocalEdges[e][1];
    n[4 + e] = 4.0 * l[a] * l[b];
    dn[4 + e] = 4.0 * (l[a] * g.grad_lambda[b] + l[b] * g.grad_lambda[a]);
  }
}

void evaluate_basis(const FeSpace& space, int cell, const std::array<double, 4>& l, std::span<BasisEval> out) {
  const auto& g = space.domain().geometry[cell];
  const auto& gl = g.grad_lambda;
  const auto& topo = space.domain().topology;
  switch (space.kind()) {
    case SpaceKind::lagrange_p1:
    case SpaceKind::lagrange_p1_pressure:
      for (int i = 0; i < 4; ++i) {
        out[i] = BasisEval{};
        out[i].value.x = l[i];
        out[i].jacobian[0] = gl[i];
      }
      break;
    case SpaceKind::lagrange_p2_vector: {
      std::array<double, 10> n;
      std::array<Vec3, 10> dn;
      p2_scalar_basis(g, l, n, dn);
      for (int node = 0; node < 10; ++node) {
        for (int c = 0; c < 3; ++c) {
          BasisEval& b = out[3 * node + c];
          b = BasisEval{};
          b.value[c] = n[node];
          b.jacobian[c] = dn[node];
        }
      }
      break;
    }
    case SpaceKind::nedelec1_lowest:
      for (int k = 0; k < 6; ++k) {
        const int a = kLocalEdges[k][0];
        const int b = kLocalEdges[k][1];
        const double s = topo.cell_edge_signs[cell][k];
        BasisEval& e = out[k];
        e.value = s * (l[a] * gl[b] - l[b] * gl[a]);
        for (int i = 0; i < 3; ++i) e.jacobian[i] = s * (gl[b][i] * gl[a] - gl[a][i] * gl[b]);
      }
      break;
    case SpaceKind::rt_lowest:
      for (int k = 0; k < 4; ++k) {
        const int a = kLocalFaces[k][0];
        const int b = kLocalFaces[k][1];
        const int c = kLocalFaces[k][2];
        const double s = 2.0 * topo.cell_face_signs[cell][k];
        const Vec3 bc = cross(gl[b], gl[c]);
        const Vec3 ca = cross(gl[c], gl[a]);
        const Vec3 ab = cross(gl[a], gl[b]);
        BasisEval& f = out[k];
        f.value = s * (l[a] * bc + l[b] * ca + l[c] * ab);
        for (int i = 0; i < 3; ++i) f.jacobian[i] = s * (bc[i] * gl[a] + ca[i] * gl[b] + ab[i] * gl[c]);
      }
      break;
    case SpaceKind::dg0:
      out[0] = BasisEval{};
      out[0].value.x = 1.0;
      break;
  }
}

BasisTable tabulate(const FeSpace& space, int cell, std::span<const std::array<double, 4>> points) {
  if (cell < 0 || cell >= space.domain().num_cells()) {
    throw SpaceError("tabulate: cell index " + std::to_string(cell) + " out of range");
  }
  BasisTable t;
  t.num_points = static_cast<int>(points.size());
  t.num_basis = space.local_size();
  t.dofs.resize(t.num_basis);
  std::vector<double> signs(t.num_basis);
  space.cell_dofs(cell, t.dofs, signs);
  t.data.resize(static_cast<std::size_t>(t.num_points) * t.num_basis);
  for (int q = 0; q < t.num_points; ++q) {
    evaluate_basis(space, cell, points[q], std::span<BasisEval>(t.data).subspan(q * t.num_basis, t.num_basis));
  }
  return t;
}

FieldFunction FieldFunction::zero(SpacePtr space) {
  FieldFunction f;
  f.coeffs.assign(space->num_dofs(), 0.0);
  f.space = std::move(space);
  return f;
}

FieldFunction FieldFunction::from_free(SpacePtr space, std::span<const double> free) {
  FieldFunction f;
  f.coeffs = space->extend(free);
  f.space = std::move(space);
  return f;
}

BasisEval FieldFunction::evaluate(int cell, const std::array<double, 4>& lambda) const {
  const int n = space->local_size();
  std::array<int, 30> dofs;
  std::array<double, 30> signs;
  std::array<BasisEval, 30> basis;
  space->cell_dofs(cell, std::span<int>(dofs.data(), n), std::span<double>(signs.data(), n));
  evaluate_basis(*space, cell, lambda, std::span<BasisEval>(basis.data(), n));
  BasisEval r;
  for (int i = 0; i < n; ++i) {
    const double c = coeffs[dofs[i]];
    if (c == 0.0) continue;
    r.value += c * basis[i].value;
    for (int k = 0; k < 3; ++k) r.jacobian[k] += c * basis[i].jacobian[k];
  }
  return r;
}

namespace {

void zero_constrained(FieldFunction& f) {
  for (int d : f.space->constrained_dofs()) f.coeffs[d] = 0.0;
}

}  // namespace

FieldFunction canonical_interpolate(SpacePtr space, const VectorFn& field) {
  FieldFunction f = FieldFunction::zero(space);
  const Domain& dom = space->domain();
  const auto& topo = dom.topology;
  const auto& xv = dom.mesh.vertices;
  switch (space->kind()) {
    case SpaceKind::lagrange_p2_vector: {
      const int nv = topo.num_vertices();
      for (int v = 0; v < nv; ++v) {
        const Vec3 val = field(xv[v]);
        for (int c = 0; c < 3; ++c) f.coeffs[3 * v + c] = val[c];
      }
      for (int e = 0; e < topo.num_edges(); ++e) {
        const Vec3 mid = 0.5 * (xv[topo.edges[e][0]] + xv[topo.edges[e][1]]);
        const Vec3 val = field(mid);
        for (int c = 0; c < 3; ++c) f.coeffs[3 * (nv + e) + c] = val[c];
      }
      break;
    }
    case SpaceKind::nedelec1_lowest: {
      const LineRule line = gauss_legendre(3);
      for (int e = 0; e < topo.num_edges(); ++e) {
        const Vec3 a = xv[topo.edges[e][0]];
        const Vec3 t = xv[topo.edges[e][1]] - a;
        double s = 0.0;
        for (std::size_t q = 0; q < line.points.size(); ++q) s += line.weights[q] * dot(field(a + line.points[q] * t), t);
        f.coeffs[e] = s;
      }
      break;
    }
    case SpaceKind::rt_lowest: {
      const TriangleRule& tri = triangle_rule(4);
      for (int k = 0; k < topo.num_faces(); ++k) {
        const auto& fv = topo.faces[k];
        const Vec3 a = xv[fv[0]], b = xv[fv[1]], c = xv[fv[2]];
        const Vec3 n = cross(b - a, c - a);
        double s = 0.0;
        for (std::size_t q = 0; q < tri.weights.size(); ++q) {
          const auto& l = tri.points[q];
          s += tri.weights[q] * dot(field(l[0] * a + l[1] * b + l[2] * c), n);
        }
        f.coeffs[k] = s;
      }
      break;
    }
    default:
      throw SpaceError(std::string("vector interpolation is undefined for ") + to_string(space->kind()));
  }
  zero_constrained(f);
  return f;
}

FieldFunction canonical_interpolate(SpacePtr space, const ScalarFn& field) {
  FieldFunction f = FieldFunction::zero(space);
  const Domain& dom = space->domain();
  switch (space->kind()) {
    case SpaceKind::lagrange_p1:
    case SpaceKind::lagrange_p1_pressure:
      for (int v = 0; v < dom.mesh.num_vertices(); ++v) f.coeffs[v] = field(dom.mesh.vertices[v]);
      break;
    case SpaceKind::dg0: {
      const QuadratureRule& rule = quadrature_rule(6);
      for (int c = 0; c < dom.num_cells(); ++c) {
        const auto& g = dom.geometry[c];
        double s = 0.0;
        for (int q = 0; q < rule.size(); ++q) s += rule.weights[q] * field(g.point(rule.points[q]));
        f.coeffs[c] = 6.0 * s;
      }
      break;
    }
    default:
      throw SpaceError(std::string("scalar interpolation is undefined for ") + to_string(space->kind()));
  }
  zero_constrained(f);
  return f;
}

double field_mean(const FieldFunction& field) {
  const auto& dom = field.space->domain();
  const auto w = field.space->mean_weights();
  const auto c = field.free_coeffs();
  return dot(w, c) / dom.total_volume();
}

FieldFunction zero_mean_project(const FieldFunction& field) {
  if (field.space->kind() != SpaceKind::dg0 && field.space->kind() != SpaceKind::lagrange_p1 &&
      field.space->kind() != SpaceKind::lagrange_p1_pressure) {
    throw SpaceError("zero_mean_project needs a dg0 or scalar P1 field");
  }
  if (field.space->bc() != BoundaryCondition::none) throw SpaceError("zero_mean_project needs a space without BC");
  FieldFunction out = field;
  const double mean = field_mean(field);
  for (double& c : out.coeffs) c -= mean;
  return out;
}

SparseMatrix incidence_grad(const MeshTopology& topo) {
  std::vector<Triplet> t;
  for (int e = 0; e < topo.num_edges(); ++e) {
    t.push_back({e, topo.edges[e][0], -1.0});
    t.push_back({e, topo.edges[e][1], 1.0});
  }
  return SparseMatrix::from_triplets(topo.num_edges(), topo.num_vertices(), t);
}

SparseMatrix incidence_curl(const MeshTopology& topo) {
  std::vector<Triplet> t;
  for (int f = 0; f < topo.num_faces(); ++f) {
    for (int k = 0; k < 3; ++k) t.push_back({f, topo.face_edges[f][k], double(topo.face_edge_signs[f][k])});
  }
  return SparseMatrix::from_triplets(topo.num_faces(), topo.num_edges(), t);
}

SparseMatrix incidence_div(const MeshTopology& topo) {
  std::vector<Triplet> t;
  for (int c = 0; c < topo.num_cells(); ++c) {
    for (int k = 0; k < 4; ++k) t.push_back({c, topo.cell_faces[c][k], double(topo.cell_face_outward[c][k])});
  }
  return SparseMatrix::from_triplets(topo.num_cells(), topo.num_faces(), t);
}

SparseMatrix exterior_derivative(const FeSpace& from, const FeSpace& to) {
  if (from.domain_ptr() != to.domain_ptr()) throw SpaceError("exterior_derivative: spaces on different domains");
  const auto& topo = from.domain().topology;
  SparseMatrix full;
  std::vector<double> row_scale;
  if (from.kind() == SpaceKind::lagrange_p1 && to.kind() == SpaceKind::nedelec1_lowest) {
    full = incidence_grad(topo);
  } else if (from.kind() == SpaceKind::nedelec1_lowest && to.kind() == SpaceKind::rt_lowest) {
    full = incidence_curl(topo);
  } else if (from.kind() == SpaceKind::rt_lowest && to.kind() == SpaceKind::dg0) {
    full = incidence_div(topo);
    for (const auto& g : from.domain().geometry) row_scale.push_back(1.0 / g.volume);
  } else {
    throw SpaceError(std::string("no exterior derivative from ") + to_string(from.kind()) + " to " +
                     to_string(to.kind()));
  }
  std::vector<Triplet> t;
  for (int i = 0; i < full.rows(); ++i) {
    const int fi = to.free_index(i);
    if (fi < 0) continue;
    for (int k = full.row_offsets()[i]; k < full.row_offsets()[i + 1]; ++k) {
      const int fj = from.free_index(full.col_indices()[k]);
      if (fj < 0) continue;
      t.push_back({fi, fj, full.values()[k] * (row_scale.empty() ? 1.0 : row_scale[i])});
    }
  }
  return SparseMatrix::from_triplets(to.num_free(), from.num_free(), t);
}

}  // namespace mhd
