#include "mhd/operators.hpp"

#include <algorithm>
#include <cmath>

#include "mhd/quadrature.hpp"

namespace mhd {

double integrate(const Domain& domain, int quad_degree, const CellIntegrand& f) {
  const QuadratureRule& rule = quadrature_rule(quad_degree);
  double total = 0.0;
  for (int c = 0; c < domain.num_cells(); ++c) {
    const auto& g = domain.geometry[c];
    double s = 0.0;
    for (int q = 0; q < rule.size(); ++q) s += rule.weights[q] * f(c, rule.points[q], g.point(rule.points[q]));
    total += 6.0 * g.volume * s;
  }
  return total;
}

DiscreteCurl::DiscreteCurl(SpacePtr div_space, SpacePtr curl_space, int quad_degree)
    : div_space_(std::move(div_space)),
      curl_space_(std::move(curl_space)),
      mass_(assemble_bilinear({FormId::vec_mass, curl_space_, curl_space_, nullptr, nullptr, quad_degree})),
      pairing_(assemble_bilinear({FormId::curl_mass_pairing, curl_space_, div_space_, nullptr, nullptr, quad_degree})),
      lu_(mass_) {}

std::vector<double> DiscreteCurl::apply_free(std::span<const double> b_free) const {
  return checked_solve(lu_, mass_, pairing_.multiply(b_free));
}

FieldFunction DiscreteCurl::apply(const FieldFunction& b) const {
  return FieldFunction::from_free(curl_space_, apply_free(b.free_coeffs()));
}

FieldFunction discrete_div(const FieldFunction& w, SpacePtr grad_space) {
  const SpacePtr& curl_space = w.space;
  const SparseMatrix me =
      assemble_bilinear({FormId::vec_mass, curl_space, curl_space, nullptr, nullptr, 2});
  const SparseMatrix mp = assemble_bilinear({FormId::vec_mass, grad_space, grad_space, nullptr, nullptr, 2});
  const SparseMatrix g = exterior_derivative(*grad_space, *curl_space);
  auto rhs = g.multiply_transpose(me.multiply(w.free_coeffs()));
  for (double& v : rhs) v = -v;
  return FieldFunction::from_free(grad_space, solve_direct(mp, rhs));
}

FieldFunction l2_project_curl(const DiscreteCurl& curl, const CellField& phi, int quad_degree) {
  const auto load = assemble_linear(phi, *curl.curl_space(), quad_degree);
  return FieldFunction::from_free(curl.curl_space(), checked_solve(curl.mass_lu(), curl.mass(), load));
}

StokesProjection stokes_project(const MatrixFn& grad_u, SpacePtr velocity, SpacePtr pressure, int quad_degree) {
  BlockSystem sys;
  const int iu = sys.add_field("u", velocity->num_free());
  const int ip = sys.add_field("p", pressure->num_free());
  const SparseMatrix a = assemble_bilinear({FormId::grad_grad, velocity, velocity, nullptr, nullptr, quad_degree});
  const SparseMatrix b = assemble_bilinear({FormId::div_pressure, pressure, velocity, nullptr, nullptr, quad_degree});
  sys.add_block(iu, iu, a);
  sys.add_block(iu, ip, b.transpose());
  sys.add_block(ip, iu, b);
  if (pressure->mean_constraint()) sys.add_border(ip, pressure->mean_weights());

  const Domain& dom = velocity->domain();
  const QuadratureRule& rule = quadrature_rule(std::max(quad_degree, 6));
  const int n = velocity->local_size();
  std::vector<int> dofs(n);
  std::vector<double> signs(n);
  std::vector<BasisEval> basis(n);
  std::vector<double> full(velocity->num_dofs(), 0.0);
  for (int c = 0; c < dom.num_cells(); ++c) {
    const auto& g = dom.geometry[c];
    velocity->cell_dofs(c, dofs, signs);
    for (int q = 0; q < rule.size(); ++q) {
      const Mat3 gu = grad_u(g.point(rule.points[q]));
      evaluate_basis(*velocity, c, rule.points[q], basis);
      const double wq = rule.weights[q] * 6.0 * g.volume;
      for (int i = 0; i < n; ++i) full[dofs[i]] += wq * frobenius_dot(gu, basis[i].jacobian);
    }
  }
  sys.rhs[iu] = velocity->restrict_to_free(full);

  const FlatSystem flat = flatten(sys);
  const auto x = solve_direct(flat.matrix, flat.rhs);
  const auto parts = flat.map.split(x);
  return {FieldFunction::from_free(velocity, parts[iu]), FieldFunction::from_free(pressure, parts[ip])};
}

FieldFunction divfree_l2_project(const VectorFn& b, SpacePtr div_space, SpacePtr multiplier, int quad_degree) {
  BlockSystem sys;
  const int ib = sys.add_field("B", div_space->num_free());
  const int ir = sys.add_field("r", multiplier->num_free());
  const SparseMatrix m = assemble_bilinear({FormId::vec_mass, div_space, div_space, nullptr, nullptr, 3});
  const SparseMatrix d = assemble_bilinear({FormId::div_scalar, multiplier, div_space, nullptr, nullptr, 3});
  sys.add_block(ib, ib, m);
  sys.add_block(ib, ir, d.transpose());
  sys.add_block(ir, ib, d);
  if (multiplier->mean_constraint()) sys.add_border(ir, multiplier->mean_weights());
  sys.rhs[ib] = assemble_linear(b, *div_space, quad_degree);
  const FlatSystem flat = flatten(sys);
  const auto x = solve_direct(flat.matrix, flat.rhs);
  return FieldFunction::from_free(div_space, flat.map.split(x)[ib]);
}

double lp_norm(const Domain& domain, const CellField& field, double p, int quad_degree) {
  const double s = integrate(domain, quad_degree, [&](int c, const std::array<double, 4>& l, const Vec3& x) {
    return std::pow(norm(field(c, l, x)), p);
  });
  return std::pow(s, 1.0 / p);
}

double lp_norm(const FieldFunction& field, double p, int quad_degree) {
  return lp_norm(
      field.space->domain(),
      [&field](int c, const std::array<double, 4>& l, const Vec3&) { return field.evaluate(c, l).value; }, p,
      quad_degree);
}

double l2_norm(const FieldFunction& f, int quad_degree) { return lp_norm(f, 2.0, quad_degree); }

double h1_seminorm(const FieldFunction& u, int quad_degree) {
  const double s = integrate(u.space->domain(), quad_degree, [&u](int c, const std::array<double, 4>& l, const Vec3&) {
    const Mat3 j = u.evaluate(c, l).jacobian;
    return frobenius_dot(j, j);
  });
  return std::sqrt(s);
}

double h1_norm(const FieldFunction& u, int quad_degree) {
  return std::hypot(l2_norm(u, quad_degree), h1_seminorm(u, quad_degree));
}

double curl_l2_norm(const FieldFunction& e, int quad_degree) {
  const double s = integrate(e.space->domain(), quad_degree, [&e](int c, const std::array<double, 4>& l, const Vec3&) {
    const Vec3 v = curl_of(e.evaluate(c, l).jacobian);
    return dot(v, v);
  });
  return std::sqrt(s);
}

double div_l2_norm(const FieldFunction& b, int quad_degree) {
  const double s = integrate(b.space->domain(), quad_degree, [&b](int c, const std::array<double, 4>& l, const Vec3&) {
    const double d = div_of(b.evaluate(c, l).jacobian);
    return d * d;
  });
  return std::sqrt(s);
}

double div_max(const FieldFunction& b) {
  double m = 0.0;
  const std::array<double, 4> centroid{0.25, 0.25, 0.25, 0.25};
  for (int c = 0; c < b.space->domain().num_cells(); ++c) {
    m = std::max(m, std::abs(div_of(b.evaluate(c, centroid).jacobian)));
  }
  return m;
}

double norm_d(const FieldFunction& b, const DiscreteCurl& curl) {
  const double l2 = l2_norm(b, 2);
  const double dv = div_l2_norm(b);
  const double hc = l2_norm(curl.apply(b), 2);
  return std::sqrt(l2 * l2 + dv * dv + hc * hc);
}

double norm_W(const FieldFunction& u, const FieldFunction& b, const DiscreteCurl& curl) {
  return std::hypot(h1_norm(u), norm_d(b, curl));
}

double norm_X(const FieldFunction& v, const FieldFunction& f, const FieldFunction& c, const FieldFunction& b_prev) {
  const double h1 = h1_norm(v);
  const double cf = curl_l2_norm(f);
  const double j = lp_norm(
      f.space->domain(),
      [&](int cell, const std::array<double, 4>& l, const Vec3&) {
        return f.evaluate(cell, l).value + cross(v.evaluate(cell, l).value, b_prev.evaluate(cell, l).value);
      },
      2.0, 6);
  const double cl = l2_norm(c, 2);
  const double cd = div_l2_norm(c);
  return std::sqrt(h1 * h1 + cf * cf + j * j + cl * cl + cd * cd);
}

}  // namespace mhd
