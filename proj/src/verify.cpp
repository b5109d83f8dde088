#include "mhd/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>

#include "mhd/operators.hpp"
#include "mhd/quadrature.hpp"

namespace mhd {

double error_value(const ErrorRow& row, const std::string& column) {
  if (column == "u_h1") return row.err_u_h1;
  if (column == "B_l2") return row.err_B_l2;
  if (column == "B_hcurl_h") return row.err_B_hcurl_h;
  if (column == "B_l3") return row.err_B_l3;
  if (column == "E_l2") return row.err_E_l2;
  if (column == "p_l2") return row.err_p_l2;
  throw std::invalid_argument("unknown error column '" + column + "'");
}

namespace {

FieldFunction difference(const FieldFunction& a, const FieldFunction& b) {
  FieldFunction d = a;
  for (std::size_t i = 0; i < d.coeffs.size(); ++i) d.coeffs[i] -= b.coeffs[i];
  return d;
}

struct AnalyticErrors {
  double u_h1, B_l2, E_l2, p_l2;
};

AnalyticErrors analytic_errors(const MhdState& st, const ManufacturedCase& mc, int degree) {
  const Domain& dom = st.u.space->domain();
  auto sq = [](double v) { return v * v; };
  AnalyticErrors e;
  e.u_h1 = std::sqrt(integrate(dom, degree, [&](int c, const std::array<double, 4>& l, const Vec3& x) {
    Mat3 d = mc.grad_u(x);
    const Mat3 jh = st.u.evaluate(c, l).jacobian;
    for (int i = 0; i < 3; ++i) d[i] -= jh[i];
    return frobenius_dot(d, d);
  }));
  auto vec_err = [&](const VectorFn& exact, const FieldFunction& fh) {
    return std::sqrt(integrate(dom, degree, [&](int c, const std::array<double, 4>& l, const Vec3& x) {
      const Vec3 d = exact(x) - fh.evaluate(c, l).value;
      return dot(d, d);
    }));
  };
  e.B_l2 = vec_err(mc.B, st.B);
  e.E_l2 = vec_err(mc.E, st.E);
  e.p_l2 = std::sqrt(integrate(dom, degree, [&](int c, const std::array<double, 4>& l, const Vec3& x) {
    return sq(mc.p(x) - st.p.evaluate(c, l).value.x);
  }));
  return e;
}

double rel_change(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), 1e-300); }

}  // namespace

ErrorRow error_norms(const MhdState& st, const ManufacturedCase& mc, const MhdDriver& driver, int measure_degree) {
  const auto& sp = driver.spaces();
  ErrorRow row;
  const AnalyticErrors e = analytic_errors(st, mc, measure_degree);
  row.err_u_h1 = e.u_h1;
  row.err_B_l2 = e.B_l2;
  row.err_E_l2 = e.E_l2;
  row.err_p_l2 = e.p_l2;
  if (measure_degree < kMaxQuadratureDegree) {
    const AnalyticErrors f = analytic_errors(st, mc, measure_degree + 1);
    row.measure_drift = std::max({rel_change(e.u_h1, f.u_h1), rel_change(e.B_l2, f.B_l2),
                                  rel_change(e.E_l2, f.E_l2), rel_change(e.p_l2, f.p_l2)});
  }
  const FieldFunction pd = divfree_l2_project(mc.B, sp.magnetic, sp.multiplier, measure_degree);
  const FieldFunction eb = difference(pd, st.B);
  row.err_B_hcurl_h = l2_norm(driver.curl().apply(eb), 2);
  row.err_B_l3 = lp_norm(eb, 3.0, measure_degree);
  const StokesProjection pv = stokes_project(mc.grad_u, sp.velocity, sp.pressure, driver.quad().fluid);
  row.err_u_proj_h1 = h1_seminorm(difference(pv.velocity, st.u), driver.quad().fluid);
  return row;
}

double ErrorTable::min_rate(const std::string& column) const {
  const auto& cols = error_columns();
  const auto it = std::find(cols.begin(), cols.end(), column);
  if (it == cols.end()) throw std::invalid_argument("unknown error column '" + column + "'");
  const auto c = static_cast<std::size_t>(it - cols.begin());
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : rates) m = std::min(m, r[c]);
  return m;
}

ErrorTable convergence_study(const StudyOptions& o) {
  ErrorTable table;
  MhdParams params = o.params;
  params.bc_family = o.family;
  params.variant = o.variant;
  const ManufacturedCase mc = builtin_case(o.family, o.lambda, params);
  table.all_converged = true;
  for (int n : o.levels) {
    auto domain = make_domain(unit_cube_mesh(n));
    const MhdDriver driver(MhdSpaces::build(domain, o.family), params, mc.sources(), o.quad);
    auto [state, report] = driver.picard_solve(o.tol, o.maxit);
    const bool converged = report.converged;
    table.reports.push_back(report);
    if (!converged) {
      table.all_converged = false;
      table.failure = "Picard iteration did not converge on level n=" + std::to_string(n) + " after " +
                      std::to_string(report.iterations) + " iterations";
      break;
    }
    ErrorRow row = error_norms(state, mc, driver, o.measure_degree);
    row.n = n;
    row.h = mesh_metrics(domain->mesh).h_max;
    row.converged = converged;
    row.iterations = report.iterations;
    table.rows.push_back(row);
  }
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    const auto& a = table.rows[i - 1];
    const auto& b = table.rows[i];
    std::vector<double> r;
    for (const auto& col : error_columns()) {
      r.push_back(std::log(error_value(a, col) / error_value(b, col)) / std::log(a.h / b.h));
    }
    table.rates.push_back(r);
  }
  return table;
}

void write_error_csv(const ErrorTable& table, std::ostream& out) {
  out << "n,h,err_u_h1,err_B_l2,err_B_hcurl_h,err_B_l3,err_E_l2,err_p_l2";
  for (const auto& c : error_columns()) out << ",rate_" << c;
  out << '\n';
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.10e", v);
    return std::string(buf);
  };
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    out << r.n << ',' << num(r.h);
    for (const auto& c : error_columns()) out << ',' << num(error_value(r, c));
    for (std::size_t k = 0; k < error_columns().size(); ++k) {
      out << ',';
      if (i > 0) out << num(table.rates[i - 1][k]);
    }
    out << '\n';
  }
}

int dense_rank(const SparseMatrix& a, double rel_tol) {
  const int m = a.rows(), n = a.cols();
  std::vector<double> d = a.to_dense();
  double scale = 0.0;
  for (double v : d) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0;
  const double tol = rel_tol * scale;
  int rank = 0;
  for (int col = 0; col < n && rank < m; ++col) {
    int piv = rank;
    for (int i = rank + 1; i < m; ++i) {
      if (std::abs(d[static_cast<std::size_t>(i) * n + col]) > std::abs(d[static_cast<std::size_t>(piv) * n + col])) piv = i;
    }
    if (std::abs(d[static_cast<std::size_t>(piv) * n + col]) <= tol) continue;
    for (int k = 0; k < n; ++k) std::swap(d[static_cast<std::size_t>(piv) * n + k], d[static_cast<std::size_t>(rank) * n + k]);
    const double p = d[static_cast<std::size_t>(rank) * n + col];
    for (int i = rank + 1; i < m; ++i) {
      const double f = d[static_cast<std::size_t>(i) * n + col] / p;
      if (f == 0.0) continue;
      for (int k = col; k < n; ++k) d[static_cast<std::size_t>(i) * n + k] -= f * d[static_cast<std::size_t>(rank) * n + k];
    }
    ++rank;
  }
  return rank;
}

namespace {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

ComplexDimensions dimensions(const std::shared_ptr<const Domain>& dom, BoundaryCondition bc) {
  const auto p1 = make_space(SpaceKind::lagrange_p1, bc, dom);
  const auto ned = make_space(SpaceKind::nedelec1_lowest, bc, dom);
  const auto rt = make_space(SpaceKind::rt_lowest, bc, dom);
  const auto dg = make_space(SpaceKind::dg0, BoundaryCondition::none, dom);
  ComplexDimensions d;
  d.vertices = p1->num_free();
  d.edges = ned->num_free();
  d.faces = rt->num_free();
  d.cells = dg->num_free();
  d.rank_grad = dense_rank(exterior_derivative(*p1, *ned));
  d.rank_curl = dense_rank(exterior_derivative(*ned, *rt));
  d.rank_div = dense_rank(exterior_derivative(*rt, *dg));
  d.kernel_grad = d.vertices - d.rank_grad;
  d.kernel_curl = d.edges - d.rank_curl;
  d.kernel_div = d.faces - d.rank_div;
  const bool none = bc == BoundaryCondition::none;
  d.exact = d.kernel_grad == (none ? 1 : 0) && d.kernel_curl == d.rank_grad && d.kernel_div == d.rank_curl &&
            d.rank_div == (none ? d.cells : d.cells - 1);
  return d;
}

}  // namespace

bool ComplexReport::pass(double tol) const {
  return div_curl_max == 0.0 && curl_grad_max == 0.0 && commuting_grad <= tol && commuting_curl <= tol &&
         commuting_div <= tol && no_bc.exact && essential.exact;
}

ComplexReport complex_check(const Mesh& mesh) {
  auto dom = make_domain(mesh);
  const auto& topo = dom->topology;
  ComplexReport rep;
  const SparseMatrix g = incidence_grad(topo);
  const SparseMatrix c = incidence_curl(topo);
  const SparseMatrix d = incidence_div(topo);
  rep.curl_grad_max = max_abs(multiply(c, g).values());
  rep.div_curl_max = max_abs(multiply(d, c).values());

  const auto p1 = make_space(SpaceKind::lagrange_p1, BoundaryCondition::none, dom);
  const auto ned = make_space(SpaceKind::nedelec1_lowest, BoundaryCondition::none, dom);
  const auto rt = make_space(SpaceKind::rt_lowest, BoundaryCondition::none, dom);
  const auto dg = make_space(SpaceKind::dg0, BoundaryCondition::none, dom);
  const SparseMatrix grad_h = exterior_derivative(*p1, *ned);
  const SparseMatrix curl_h = exterior_derivative(*ned, *rt);
  const SparseMatrix div_h = exterior_derivative(*rt, *dg);

  auto residual = [](const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
  };

  const ScalarFn phi = [](const Vec3& x) { return 1.0 + 2.0 * x.x - x.y + 0.5 * x.z + x.x * x.y - 0.25 * x.z * x.z; };
  const VectorFn grad_phi = [](const Vec3& x) { return Vec3{2.0 + x.y, -1.0 + x.x, 0.5 - 0.5 * x.z}; };
  rep.commuting_grad = residual(canonical_interpolate(ned, grad_phi).coeffs,
                                grad_h.multiply(canonical_interpolate(p1, phi).coeffs));

  const VectorFn v = [](const Vec3& x) {
    return Vec3{0.3 + x.y - 2.0 * x.z, -1.0 + 0.5 * x.x + x.z, 2.0 - x.x + 0.7 * x.y};
  };
  const VectorFn curl_v = [](const Vec3&) { return Vec3{0.7 - 1.0, -2.0 + 1.0, 0.5 - 1.0}; };
  rep.commuting_curl =
      residual(curl_h.multiply(canonical_interpolate(ned, v).coeffs), canonical_interpolate(rt, curl_v).coeffs);

  const VectorFn w = [](const Vec3& x) { return Vec3{1.0 + 2.0 * x.x - x.y, 0.5 * x.z - 3.0 * x.y, x.x + 4.0 * x.z}; };
  const ScalarFn div_w = [](const Vec3&) { return 2.0 - 3.0 + 4.0; };
  rep.commuting_div =
      residual(div_h.multiply(canonical_interpolate(rt, w).coeffs), canonical_interpolate(dg, div_w).coeffs);

  const VectorFn smooth = [](const Vec3& x) {
    return Vec3{std::sin(x.y) * std::exp(x.z), std::cos(x.x * x.z), x.x * std::sin(x.y)};
  };
  const VectorFn curl_smooth = [](const Vec3& x) {
    return Vec3{x.x * std::cos(x.y) + x.x * std::sin(x.x * x.z), std::sin(x.y) * std::exp(x.z) - std::sin(x.y),
                -x.z * std::sin(x.x * x.z) - std::cos(x.y) * std::exp(x.z)};
  };
  rep.commuting_smooth = residual(curl_h.multiply(canonical_interpolate(ned, smooth).coeffs),
                                  canonical_interpolate(rt, curl_smooth).coeffs);

  rep.no_bc = dimensions(dom, BoundaryCondition::none);
  rep.essential = dimensions(dom, BoundaryCondition::essential_zero);
  return rep;
}

L3Table l3_study(const std::vector<int>& levels, int samples, BcFamily family, std::uint64_t seed, double slack) {
  if (samples < 1) throw std::invalid_argument("l3_study needs at least one sample");
  L3Table table;
  table.family = family;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto bc = family == BcFamily::normal_B ? BoundaryCondition::essential_zero : BoundaryCondition::none;
  for (int n : levels) {
    auto dom = make_domain(unit_cube_mesh(n));
    const auto ned = make_space(SpaceKind::nedelec1_lowest, bc, dom);
    const auto rt = make_space(SpaceKind::rt_lowest, bc, dom);
    const DiscreteCurl curl(rt, ned);
    const SparseMatrix d = exterior_derivative(*ned, *rt);
    L3Row row;
    row.n = n;
    row.h = mesh_metrics(dom->mesh).h_max;
    row.min_ratio_l3 = std::numeric_limits<double>::infinity();
    for (int k = 0; k < samples; ++k) {
      std::vector<double> f(ned->num_free());
      for (double& x : f) x = normal(rng);
      const double nf = norm2(f);
      for (double& x : f) x /= nf;
      const FieldFunction dh = FieldFunction::from_free(rt, d.multiply(f));
      const double hc = l2_norm(curl.apply(dh), 2);
      const double l3 = lp_norm(dh, 3.0, 6);
      const double l2 = l2_norm(dh, 2);
      if (!(hc > 0.0) || !(l2 > 0.0)) continue;
      ++row.samples;
      row.max_ratio_l3 = std::max(row.max_ratio_l3, l3 / hc);
      row.min_ratio_l3 = std::min(row.min_ratio_l3, l3 / hc);
      row.max_ratio_poincare = std::max(row.max_ratio_poincare, l2 / hc);
    }
    table.rows.push_back(row);
  }
  table.pass = true;
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    table.growth.push_back(table.rows[i].max_ratio_l3 / table.rows[i - 1].max_ratio_l3);
    table.growth_poincare.push_back(table.rows[i].max_ratio_poincare / table.rows[i - 1].max_ratio_poincare);
    if (!(table.growth.back() <= 1.0 + slack) || !(table.growth_poincare.back() <= 1.0 + slack)) table.pass = false;
  }
  for (const auto& r : table.rows) {
    if (r.samples != samples || !std::isfinite(r.max_ratio_l3) || !(r.min_ratio_l3 > 0.0)) table.pass = false;
  }
  return table;
}

std::vector<InfSupRow> inf_sup_study(const StudyOptions& o) {
  std::vector<InfSupRow> rows;
  MhdParams params = o.params;
  params.bc_family = o.family;
  params.variant = o.variant;
  const ManufacturedCase mc = builtin_case(o.family, o.lambda, params);
  for (int n : o.levels) {
    auto domain = make_domain(unit_cube_mesh(n));
    const MhdDriver driver(MhdSpaces::build(domain, o.family), params, mc.sources(), o.quad);
    const auto [state, report] = driver.picard_solve(o.tol, o.maxit);
    const FlatSystem flat = flatten(driver.assemble_picard_step(state.u, state.B));
    rows.push_back({n, smallest_singular_value(flat.matrix, driver.gram_matrix(flat))});
  }
  return rows;
}

}  // namespace mhd
