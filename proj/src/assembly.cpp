#include "mhd/assembly.hpp"

#include <string>

#include "mhd/quadrature.hpp"

namespace mhd {

const char* to_string(FormId id) {
  switch (id) {
    case FormId::grad_grad: return "grad_grad";
    case FormId::vec_mass: return "vec_mass";
    case FormId::curl_mass_pairing: return "curl_mass_pairing";
    case FormId::weak_curl_pairing: return "weak_curl_pairing";
    case FormId::div_scalar: return "div_scalar";
    case FormId::div_pressure: return "div_pressure";
    case FormId::convection_skew: return "convection_skew";
    case FormId::ohm_cross: return "ohm_cross";
    case FormId::lorentz_cross: return "lorentz_cross";
    case FormId::divdiv: return "divdiv";
    case FormId::load_vector: return "load_vector";
  }
  return "unknown";
}

int default_quad_degree(FormId id, const QuadDegrees& q) {
  switch (id) {
    case FormId::grad_grad:
    case FormId::vec_mass:
    case FormId::div_pressure:
      return q.fluid;
    case FormId::curl_mass_pairing:
    case FormId::weak_curl_pairing:
    case FormId::div_scalar:
    case FormId::divdiv:
      return q.pairing;
    case FormId::convection_skew:
      return q.convection;
    case FormId::ohm_cross:
    case FormId::lorentz_cross:
      return q.cross;
    case FormId::load_vector:
      return q.load;
  }
  return q.fluid;
}

namespace {

using Features = std::array<Vec3, 3>;

/// Coefficient values at one quadrature point.
struct PointCoeffs {
  Vec3 w;
  Vec3 b;
};

bool is_curl_space(const FeSpace& s) { return s.kind() == SpaceKind::nedelec1_lowest; }
bool is_div_space(const FeSpace& s) { return s.kind() == SpaceKind::rt_lowest; }
bool is_velocity(const FeSpace& s) { return s.kind() == SpaceKind::lagrange_p2_vector; }

void require(bool ok, const FormSpec& form, const char* what) {
  if (!ok) throw AssemblyError(std::string(to_string(form.id)) + ": " + what);
}

/// Local matrices are sums over features: entry(i,j) = sum_k test_k(i) . trial_k(j).
template <int NF, class TestMap, class TrialMap>
SparseMatrix assemble_features(const FormSpec& form, int degree, TestMap test_map, TrialMap trial_map) {
  const FeSpace& test = *form.test;
  const FeSpace& trial = *form.trial;
  const Domain& dom = test.domain();
  const QuadratureRule& rule = quadrature_rule(degree);
  const int nt = test.local_size();
  const int ns = trial.local_size();
  const int nq = rule.size();

  std::vector<int> tdofs(nt), sdofs(ns);
  std::vector<double> tsigns(nt), ssigns(ns);
  std::vector<BasisEval> tb(nt), sb(ns);
  std::vector<Features> tf(static_cast<std::size_t>(nq) * nt), sf(static_cast<std::size_t>(nq) * ns);
  std::vector<double> local(static_cast<std::size_t>(nt) * ns);
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(dom.num_cells()) * nt * ns);

  for (int c = 0; c < dom.num_cells(); ++c) {
    test.cell_dofs(c, tdofs, tsigns);
    trial.cell_dofs(c, sdofs, ssigns);
    const double jac = 6.0 * dom.geometry[c].volume;
    for (int q = 0; q < nq; ++q) {
      const auto& l = rule.points[q];
      PointCoeffs pc;
      if (form.w) pc.w = form.w->evaluate(c, l).value;
      if (form.b) pc.b = form.b->evaluate(c, l).value;
      evaluate_basis(test, c, l, tb);
      evaluate_basis(trial, c, l, sb);
      const double wq = rule.weights[q] * jac;
      for (int i = 0; i < nt; ++i) {
        tf[q * nt + i] = test_map(tb[i], pc);
        for (int k = 0; k < NF; ++k) tf[q * nt + i][k] *= wq;
      }
      for (int j = 0; j < ns; ++j) sf[q * ns + j] = trial_map(sb[j], pc);
    }
    std::fill(local.begin(), local.end(), 0.0);
    for (int q = 0; q < nq; ++q) {
      for (int i = 0; i < nt; ++i) {
        const Features& a = tf[q * nt + i];
        double* row = &local[static_cast<std::size_t>(i) * ns];
        for (int j = 0; j < ns; ++j) {
          const Features& b = sf[q * ns + j];
          double s = 0.0;
          for (int k = 0; k < NF; ++k) s += dot(a[k], b[k]);
          row[j] += s;
        }
      }
    }
    for (int i = 0; i < nt; ++i) {
      const int fi = test.free_index(tdofs[i]);
      if (fi < 0) continue;
      for (int j = 0; j < ns; ++j) {
        const int fj = trial.free_index(sdofs[j]);
        if (fj < 0) continue;
        triplets.push_back({fi, fj, local[static_cast<std::size_t>(i) * ns + j]});
      }
    }
  }
  return SparseMatrix::from_triplets(test.num_free(), trial.num_free(), triplets);
}

Features one(const Vec3& v) { return {v, Vec3{}, Vec3{}}; }

}  // namespace

SparseMatrix assemble_bilinear(const FormSpec& form) {
  require(form.test && form.trial, form, "missing space");
  require(form.test->domain_ptr() == form.trial->domain_ptr(), form, "spaces live on different meshes");
  const int degree = form.quad_degree > 0 ? form.quad_degree : default_quad_degree(form.id);
  const FeSpace& test = *form.test;
  const FeSpace& trial = *form.trial;
  auto value = [](const BasisEval& e, const PointCoeffs&) { return one(e.value); };
  auto jacobian = [](const BasisEval& e, const PointCoeffs&) { return Features{e.jacobian[0], e.jacobian[1], e.jacobian[2]}; };
  auto curl = [](const BasisEval& e, const PointCoeffs&) { return one(curl_of(e.jacobian)); };
  auto div = [](const BasisEval& e, const PointCoeffs&) { return one(Vec3{div_of(e.jacobian), 0.0, 0.0}); };

  switch (form.id) {
    case FormId::grad_grad:
      require(form.test == form.trial, form, "test and trial spaces must coincide");
      require(is_velocity(test) || test.kind() == SpaceKind::lagrange_p1 ||
                  test.kind() == SpaceKind::lagrange_p1_pressure,
              form, "needs a Lagrange space");
      return assemble_features<3>(form, degree, jacobian, jacobian);
    case FormId::vec_mass:
      require(test.kind() == trial.kind(), form, "test and trial kinds must coincide");
      return assemble_features<1>(form, degree, value, value);
    case FormId::curl_mass_pairing:
      require(is_curl_space(test) && is_div_space(trial), form, "needs test curl space and trial div space");
      return assemble_features<1>(form, degree, curl, value);
    case FormId::weak_curl_pairing:
      require(is_div_space(test) && is_curl_space(trial), form, "needs test div space and trial curl space");
      return assemble_features<1>(form, degree, value, curl);
    case FormId::div_scalar:
      require(test.kind() == SpaceKind::dg0 && is_div_space(trial), form, "needs test dg0 and trial div space");
      return assemble_features<1>(form, degree, value, div);
    case FormId::div_pressure:
      require(test.kind() == SpaceKind::lagrange_p1_pressure && is_velocity(trial), form,
              "needs test pressure and trial velocity");
      return assemble_features<1>(form, degree, value, div);
    case FormId::divdiv:
      require(is_div_space(test) && is_div_space(trial), form, "needs div spaces");
      return assemble_features<1>(form, degree, div, div);
    case FormId::convection_skew:
      require(is_velocity(test) && is_velocity(trial), form, "needs velocity spaces");
      require(form.w != nullptr, form, "missing frozen velocity w");
      return assemble_features<2>(
          form, degree,
          [](const BasisEval& e, const PointCoeffs& p) { return Features{e.value, e.jacobian.apply(p.w), Vec3{}}; },
          [](const BasisEval& e, const PointCoeffs& p) {
            return Features{0.5 * e.jacobian.apply(p.w), -0.5 * e.value, Vec3{}};
          });
    case FormId::ohm_cross:
      require(is_curl_space(test) && is_velocity(trial), form, "needs test curl space and trial velocity");
      require(form.b != nullptr, form, "missing frozen magnetic field");
      return assemble_features<1>(form, degree, value,
                                  [](const BasisEval& e, const PointCoeffs& p) { return one(cross(e.value, p.b)); });
    case FormId::lorentz_cross:
      require(is_velocity(test) && (is_curl_space(trial) || is_velocity(trial)), form,
              "needs test velocity and trial curl space or velocity");
      require(form.b != nullptr, form, "missing frozen magnetic field");
      if (is_velocity(trial)) {
        auto vxb = [](const BasisEval& e, const PointCoeffs& p) { return one(cross(e.value, p.b)); };
        return assemble_features<1>(form, degree, vxb, vxb);
      }
      return assemble_features<1>(
          form, degree, [](const BasisEval& e, const PointCoeffs& p) { return one(cross(e.value, p.b)); }, value);
    case FormId::load_vector:
      break;
  }
  throw AssemblyError("load_vector is a linear form; use assemble_linear");
}

std::vector<double> assemble_linear(const CellField& f, const FeSpace& space, int quad_degree) {
  const Domain& dom = space.domain();
  const QuadratureRule& rule = quadrature_rule(quad_degree);
  const int n = space.local_size();
  std::vector<int> dofs(n);
  std::vector<double> signs(n);
  std::vector<BasisEval> basis(n);
  std::vector<double> full(space.num_dofs(), 0.0);
  for (int c = 0; c < dom.num_cells(); ++c) {
    const auto& g = dom.geometry[c];
    space.cell_dofs(c, dofs, signs);
    for (int q = 0; q < rule.size(); ++q) {
      const auto& l = rule.points[q];
      const Vec3 fv = f(c, l, g.point(l));
      evaluate_basis(space, c, l, basis);
      const double wq = rule.weights[q] * 6.0 * g.volume;
      for (int i = 0; i < n; ++i) full[dofs[i]] += wq * dot(fv, basis[i].value);
    }
  }
  return space.restrict_to_free(full);
}

std::vector<double> assemble_linear(const VectorFn& f, const FeSpace& space, int quad_degree) {
  if (!space.is_vector()) throw AssemblyError("vector load needs a vector space");
  return assemble_linear(CellField([&f](int, const std::array<double, 4>&, const Vec3& x) { return f(x); }), space,
                         quad_degree);
}

std::vector<double> assemble_linear(const ScalarFn& f, const FeSpace& space, int quad_degree) {
  if (space.is_vector()) throw AssemblyError("scalar load needs a scalar space");
  return assemble_linear(
      CellField([&f](int, const std::array<double, 4>&, const Vec3& x) { return Vec3{f(x), 0.0, 0.0}; }), space,
      quad_degree);
}

}  // namespace mhd
