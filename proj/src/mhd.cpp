#include "mhd/mhd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mhd {

const char* to_string(BcFamily f) { return f == BcFamily::normal_B ? "normal_B" : "tangential_B"; }
const char* to_string(Variant v) { return v == Variant::multiplier ? "multiplier" : "augmented"; }

BcFamily parse_bc_family(const std::string& s) {
  if (s == "normal_B") return BcFamily::normal_B;
  if (s == "tangential_B") return BcFamily::tangential_B;
  throw std::invalid_argument("unknown bc_family '" + s + "'");
}

Variant parse_variant(const std::string& s) {
  if (s == "multiplier") return Variant::multiplier;
  if (s == "augmented") return Variant::augmented;
  throw std::invalid_argument("unknown variant '" + s + "'");
}

void MhdParams::validate() const {
  auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!ok(Re) || !ok(Rm) || !ok(s)) throw std::invalid_argument("Re, Rm and s must be finite and positive");
}

MhdSpaces MhdSpaces::build(std::shared_ptr<const Domain> domain, BcFamily family) {
  MhdSpaces sp;
  sp.domain = domain;
  sp.family = family;
  const auto em = family == BcFamily::normal_B ? BoundaryCondition::essential_zero : BoundaryCondition::none;
  sp.velocity = make_space(SpaceKind::lagrange_p2_vector, BoundaryCondition::essential_zero, domain);
  sp.pressure = make_space(SpaceKind::lagrange_p1_pressure, BoundaryCondition::none, domain, true);
  sp.electric = make_space(SpaceKind::nedelec1_lowest, em, domain);
  sp.magnetic = make_space(SpaceKind::rt_lowest, em, domain);
  sp.multiplier = make_space(SpaceKind::dg0, BoundaryCondition::none, domain, family == BcFamily::normal_B);
  return sp;
}

MhdState MhdState::zero(const MhdSpaces& spaces, Variant variant) {
  MhdState s{FieldFunction::zero(spaces.velocity), FieldFunction::zero(spaces.electric),
             FieldFunction::zero(spaces.magnetic), FieldFunction::zero(spaces.pressure), std::nullopt};
  if (variant == Variant::multiplier) s.r = FieldFunction::zero(spaces.multiplier);
  return s;
}

double ReducedCheck::max_discrepancy() const {
  return std::max(ohm_discrepancy / std::max(scale, std::numeric_limits<double>::min()), pythagoras_residual);
}

namespace {

FieldFunction difference(const FieldFunction& a, const FieldFunction& b) {
  FieldFunction d = a;
  for (std::size_t i = 0; i < d.coeffs.size(); ++i) d.coeffs[i] -= b.coeffs[i];
  return d;
}

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

MhdDriver::MhdDriver(MhdSpaces spaces, MhdParams params, SourceData sources, QuadDegrees quad)
    : spaces_(std::move(spaces)), params_(params), sources_(std::move(sources)), quad_(quad) {
  params_.validate();
  const auto& sp = spaces_;
  curl_ = std::make_unique<DiscreteCurl>(sp.magnetic, sp.electric, quad_.pairing);
  stiffness_ = assemble_bilinear({FormId::grad_grad, sp.velocity, sp.velocity, nullptr, nullptr, quad_.fluid});
  div_pressure_ = assemble_bilinear({FormId::div_pressure, sp.pressure, sp.velocity, nullptr, nullptr, quad_.fluid});
  mass_E_ = curl_->mass();
  pairing_ = curl_->pairing();
  weak_curl_ = assemble_bilinear({FormId::weak_curl_pairing, sp.magnetic, sp.electric, nullptr, nullptr, quad_.pairing});
  div_scalar_ = assemble_bilinear({FormId::div_scalar, sp.multiplier, sp.magnetic, nullptr, nullptr, quad_.pairing});
  divdiv_ = assemble_bilinear({FormId::divdiv, sp.magnetic, sp.magnetic, nullptr, nullptr, quad_.pairing});
  f_load_ = sources_.f ? assemble_linear(sources_.f, *sp.velocity, quad_.load)
                       : std::vector<double>(sp.velocity->num_free(), 0.0);
  g_load_ = sources_.g ? assemble_linear(sources_.g, *sp.electric, quad_.load)
                       : std::vector<double>(sp.electric->num_free(), 0.0);
  if (norm2(f_load_) > 0.0) f_dual_norm_ = std::sqrt(std::max(0.0, dot(f_load_, solve_direct(stiffness_, f_load_))));
}

BlockSystem MhdDriver::assemble_picard_step(const FieldFunction& u_prev, const FieldFunction& b_prev) const {
  const auto& sp = spaces_;
  if (u_prev.space != sp.velocity || b_prev.space != sp.magnetic) {
    throw std::invalid_argument("assemble_picard_step: previous iterate lives on foreign spaces");
  }
  const double s = params_.s;
  const double alpha = params_.alpha();
  BlockSystem sys;
  const int iu = sys.add_field("u", sp.velocity->num_free());
  const int ie = sys.add_field("E", sp.electric->num_free());
  const int ib = sys.add_field("B", sp.magnetic->num_free());
  const int ip = sys.add_field("p", sp.pressure->num_free());
  const bool multiplier = params_.variant == Variant::multiplier;
  const int ir = multiplier ? sys.add_field("r", sp.multiplier->num_free()) : -1;

  sys.add_block(iu, iu, stiffness_, 1.0 / params_.Re);
  sys.add_block(iu, iu,
                assemble_bilinear({FormId::convection_skew, sp.velocity, sp.velocity, &u_prev, nullptr, quad_.convection}));
  const bool coupled = std::any_of(b_prev.coeffs.begin(), b_prev.coeffs.end(), [](double v) { return v != 0.0; });
  if (coupled) {
    sys.add_block(iu, iu,
                  assemble_bilinear({FormId::lorentz_cross, sp.velocity, sp.velocity, nullptr, &b_prev, quad_.cross}), s);
    sys.add_block(iu, ie,
                  assemble_bilinear({FormId::lorentz_cross, sp.velocity, sp.electric, nullptr, &b_prev, quad_.cross}), s);
    sys.add_block(ie, iu,
                  assemble_bilinear({FormId::ohm_cross, sp.electric, sp.velocity, nullptr, &b_prev, quad_.cross}), s);
  }
  const SparseMatrix bt = div_pressure_.transpose();
  sys.add_block(iu, ip, bt, -1.0);
  sys.add_block(ip, iu, div_pressure_, -1.0);
  sys.add_block(ie, ie, mass_E_, s);
  sys.add_block(ie, ib, pairing_, -alpha);
  sys.add_block(ib, ie, weak_curl_, alpha);
  if (multiplier) {
    sys.add_block(ib, ir, div_scalar_.transpose());
    sys.add_block(ir, ib, div_scalar_);
  } else {
    sys.add_block(ib, ib, divdiv_, alpha);
  }
  sys.add_border(ip, sp.pressure->mean_weights());
  if (multiplier && sp.multiplier->mean_constraint()) sys.add_border(ir, sp.multiplier->mean_weights());
  sys.rhs[iu] = f_load_;
  sys.rhs[ie] = g_load_;
  return sys;
}

MhdState MhdDriver::solve_step(const BlockSystem& system, double* residual) const {
  const FlatSystem flat = flatten(system);
  const LuFactorization lu(flat.matrix);
  const auto x = checked_solve(lu, flat.matrix, flat.rhs);
  if (residual) *residual = relative_residual(flat.matrix, x, flat.rhs);
  const auto parts = flat.map.split(x);
  const auto& sp = spaces_;
  MhdState st{FieldFunction::from_free(sp.velocity, parts[0]), FieldFunction::from_free(sp.electric, parts[1]),
              FieldFunction::from_free(sp.magnetic, parts[2]), FieldFunction::from_free(sp.pressure, parts[3]),
              std::nullopt};
  if (system.field_names.size() > 4) st.r = FieldFunction::from_free(sp.multiplier, parts[4]);
  return st;
}

double MhdDriver::norm_W(const FieldFunction& u, const FieldFunction& b) const { return mhd::norm_W(u, b, *curl_); }

double MhdDriver::distance_W(const MhdState& a, const MhdState& b) const {
  return norm_W(difference(a.u, b.u), difference(a.B, b.B));
}

std::pair<MhdState, PicardReport> MhdDriver::picard_solve(double tol, int maxit,
                                                          const std::optional<MhdState>& init) const {
  if (!(tol > 0.0) || maxit < 1) throw std::invalid_argument("picard_solve: need tol > 0 and maxit >= 1");
  MhdState prev = init ? *init : MhdState::zero(spaces_, params_.variant);
  PicardReport report;
  for (int it = 1; it <= maxit; ++it) {
    double residual = 0.0;
    MhdState next = solve_step(assemble_picard_step(prev.u, prev.B), &residual);
    const double inc = distance_W(next, prev);
    const FieldFunction du = difference(next.u, prev.u);
    const FieldFunction de = difference(next.E, prev.E);
    const double inc_e = lp_norm(
        *spaces_.domain,
        [&](int c, const std::array<double, 4>& l, const Vec3&) {
          return de.evaluate(c, l).value + cross(du.evaluate(c, l).value, prev.B.evaluate(c, l).value);
        },
        2.0, quad_.cross);
    report.iterations = it;
    report.increments.push_back(inc);
    report.increments_E.push_back(inc_e);
    report.linear_residuals.push_back(residual);
    report.history.push_back(diagnostics(next, prev.B));
    prev = std::move(next);
    if (inc <= tol * std::max(1.0, norm_W(prev.u, prev.B))) {
      report.converged = true;
      break;
    }
  }
  return {std::move(prev), std::move(report)};
}

Diagnostics MhdDriver::diagnostics(const MhdState& st, const FieldFunction& b_prev) const {
  Diagnostics d;
  const Domain& dom = *spaces_.domain;
  d.grad_u_norm = h1_seminorm(st.u, quad_.fluid);
  d.j_norm = lp_norm(
      dom,
      [&](int c, const std::array<double, 4>& l, const Vec3&) {
        return st.E.evaluate(c, l).value + cross(st.u.evaluate(c, l).value, b_prev.evaluate(c, l).value);
      },
      2.0, quad_.cross);
  d.energy_lhs = d.grad_u_norm * d.grad_u_norm / params_.Re + params_.s * d.j_norm * d.j_norm;
  d.energy_rhs = dot(f_load_, st.u.free_coeffs()) + dot(g_load_, st.E.free_coeffs());
  d.energy_residual = safe_ratio(std::abs(d.energy_lhs - d.energy_rhs), std::max(std::abs(d.energy_lhs), std::abs(d.energy_rhs)));

  d.divB_max = div_max(st.B);
  const double b_l2 = l2_norm(st.B, 2);
  const double b_div = div_l2_norm(st.B);
  d.divB_scale = std::max(1.0, std::hypot(b_l2, b_div));
  d.r_norm = st.r ? l2_norm(*st.r, 2) : 0.0;
  d.curlE_norm = curl_l2_norm(st.E);
  d.E_norm = l2_norm(st.E, 2);
  d.curlE_scale = std::max(1.0, std::hypot(d.E_norm, d.curlE_norm));
  d.hcurlB_norm = l2_norm(curl_->apply(st.B), 2);
  d.B_norm_d = std::sqrt(b_l2 * b_l2 + b_div * b_div + d.hcurlB_norm * d.hcurlB_norm);

  const double re = params_.Re, rm = params_.Rm, s = params_.s;
  d.f_dual_norm = f_dual_norm_;
  const double fd = f_dual_norm_;
  d.energy2_ratio = safe_ratio(0.5 * d.grad_u_norm * d.grad_u_norm / re + s * d.j_norm * d.j_norm, 0.5 * re * fd * fd);
  d.energy4_ratio = safe_ratio(d.hcurlB_norm, std::sqrt(re) * rm / std::sqrt(s) * fd);
  d.energy5_ratio = safe_ratio(d.E_norm, std::pow(re, 1.5) * rm / std::sqrt(s) * fd * fd);
  return d;
}

ReducedCheck MhdDriver::reduced_equivalence_check(const MhdState& st) const {
  ReducedCheck out;
  const Domain& dom = *spaces_.domain;
  const CellField phi = [&](int c, const std::array<double, 4>& l, const Vec3&) {
    return cross(st.u.evaluate(c, l).value, st.B.evaluate(c, l).value);
  };
  const FieldFunction p_phi = l2_project_curl(*curl_, phi, quad_.cross);
  const auto hc = curl_->apply_free(st.B.free_coeffs());
  auto d = st.E.free_coeffs();
  const auto pf = p_phi.free_coeffs();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += pf[i] - hc[i] / params_.Rm;
  out.ohm_discrepancy = std::sqrt(std::max(0.0, mass_E_.bilinear(d, d)));

  const auto pg = checked_solve(curl_->mass_lu(), curl_->mass(), g_load_);
  std::vector<double> c(hc.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] -= pg[i] / params_.s;
    c[i] = hc[i] / params_.Rm + pg[i] / params_.s;
  }
  out.ohm_source_residual = std::sqrt(std::max(0.0, mass_E_.bilinear(d, d)));
  out.curl_source_norm = std::sqrt(std::max(0.0, mass_E_.bilinear(c, c)));

  const double n_phi = std::pow(lp_norm(dom, phi, 2.0, quad_.cross), 2);
  const double n_p = mass_E_.bilinear(pf, pf);
  const double n_res = std::pow(lp_norm(
                                    dom,
                                    [&](int c, const std::array<double, 4>& l, const Vec3& x) {
                                      return phi(c, l, x) - p_phi.evaluate(c, l).value;
                                    },
                                    2.0, quad_.cross),
                                2);
  out.pythagoras_residual = safe_ratio(std::abs(n_phi - n_p - n_res), n_phi);
  out.scale = l2_norm(st.E, 2) + norm_d(st.B, *curl_);
  return out;
}

SparseMatrix MhdDriver::gram_matrix(const FlatSystem& layout) const {
  const auto& sp = spaces_;
  const auto& map = layout.map;
  std::vector<Triplet> t;
  auto put = [&](int field, const SparseMatrix& m) {
    if (field >= static_cast<int>(map.offsets.size())) return;
    m.append_triplets(t, map.offsets[field], map.offsets[field]);
  };
  const SparseMatrix mv = assemble_bilinear({FormId::vec_mass, sp.velocity, sp.velocity, nullptr, nullptr, quad_.fluid});
  put(0, add(mv, stiffness_));
  const SparseMatrix mb = assemble_bilinear({FormId::vec_mass, sp.magnetic, sp.magnetic, nullptr, nullptr, quad_.pairing});
  const SparseMatrix dc = exterior_derivative(*sp.electric, *sp.magnetic);
  const SparseMatrix curlcurl = multiply(dc.transpose(), multiply(mb, dc));
  put(1, add(mass_E_, curlcurl));
  put(2, add(mb, divdiv_));
  put(3, assemble_bilinear({FormId::vec_mass, sp.pressure, sp.pressure, nullptr, nullptr, quad_.fluid}));
  put(4, assemble_bilinear({FormId::vec_mass, sp.multiplier, sp.multiplier, nullptr, nullptr, 1}));
  for (int k = map.border_offset; k < map.total; ++k) t.push_back({k, k, 1.0});
  return SparseMatrix::from_triplets(map.total, map.total, t);
}

double smallest_singular_value(const SparseMatrix& a, const SparseMatrix& gram, int max_iterations, double tol) {
  const LuFactorization lu(a);
  std::vector<double> x(a.rows());
  for (int i = 0; i < a.rows(); ++i) x[i] = 1.0 + 0.5 * std::sin(1.0 + 7.0 * i);
  double mu = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    const double xmx = gram.bilinear(x, x);
    for (double& v : x) v /= std::sqrt(xmx);
    const auto y = lu.solve(gram.multiply(lu.solve_transpose(gram.multiply(x))));
    const double mu_new = gram.bilinear(x, y);
    x = y;
    if (std::abs(mu_new - mu) <= tol * std::abs(mu_new)) {
      mu = mu_new;
      break;
    }
    mu = mu_new;
  }
  return 1.0 / std::sqrt(mu);
}

VariantComparison variant_equivalence(const MhdSpaces& spaces, MhdParams params, const SourceData& sources,
                                      double tol, int maxit) {
  VariantComparison out;
  params.variant = Variant::multiplier;
  const MhdDriver dm(spaces, params, sources);
  std::tie(out.multiplier, out.multiplier_report) = dm.picard_solve(tol, maxit);
  params.variant = Variant::augmented;
  const MhdDriver da(spaces, params, sources);
  std::tie(out.augmented, out.augmented_report) = da.picard_solve(tol, maxit);

  const auto& m = out.multiplier;
  const auto& a = out.augmented;
  const double w = dm.distance_W(m, a) / std::max(1.0, dm.norm_W(m.u, m.B));
  const double e = l2_norm(difference(m.E, a.E), 2) / std::max(1.0, l2_norm(m.E, 2));
  const double p = l2_norm(difference(m.p, a.p), 2) / std::max(1.0, l2_norm(m.p, 2));
  out.discrepancy = std::max({w, e, p});
  return out;
}

}  // namespace mhd
