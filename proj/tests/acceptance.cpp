#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "mhd/linalg.hpp"
#include "mhd/manufactured.hpp"
#include "mhd/mesh.hpp"
#include "mhd/mhd.hpp"
#include "mhd/operators.hpp"
#include "mhd/verify.hpp"

using namespace mhd;

namespace {

constexpr double kTol = 1e-10;
constexpr int kMaxit = 50;
constexpr double kLambda = 0.1;

const BcFamily kFamilies[] = {BcFamily::normal_B, BcFamily::tangential_B};
const Variant kVariants[] = {Variant::multiplier, Variant::augmented};

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

MhdParams params_for(BcFamily fam, Variant var) {
  MhdParams p;
  p.bc_family = fam;
  p.variant = var;
  return p;
}

struct CaseRun {
  int n;
  MhdSpaces spaces;
  MhdParams params;
  ManufacturedCase mc;
  MhdDriver driver;
  MhdState state;
  PicardReport report;
  CaseRun(int n, BcFamily fam, Variant var, bool with_g)
      : n(n),
        spaces(MhdSpaces::build(make_domain(unit_cube_mesh(n)), fam)),
        params(params_for(fam, var)),
        mc(builtin_case(fam, kLambda, params)),
        driver(spaces, params, with_g ? mc.sources() : mc.sources_without_g()) {
    std::tie(state, report) = driver.picard_solve(kTol, kMaxit);
  }
};

std::string tag(int n, BcFamily fam, Variant var) {
  return std::string(to_string(fam)) + "/" + to_string(var) + "/n=" + std::to_string(n);
}

/// Worst value of `measure / bound` over every iterate and the converged state of each run.
struct Worst {
  double ratio = 0.0;
  std::string where;
  void add(double value, double bound, const std::string& at) {
    const double q = value / bound;
    if (where.empty() || !(q <= ratio)) {
      ratio = q;
      where = at;
    }
  }
};

Outcome criterion_invariants(const std::vector<CaseRun*>& runs, int which) {
  Worst w;
  bool all_converged = true;
  for (const CaseRun* r : runs) {
    all_converged = all_converged && r->report.converged;
    std::vector<Diagnostics> ds = r->report.history;
    ds.push_back(r->driver.diagnostics(r->state));
    const std::string at = tag(r->n, r->params.bc_family, r->params.variant);
    for (const Diagnostics& d : ds) {
      switch (which) {
        case 1:
          w.add(d.divB_max, kTol * d.divB_scale, at);
          break;
        case 2:
          w.add(d.r_norm, kTol * std::max(1.0, d.B_norm_d), at);
          w.add(d.curlE_norm, kTol * d.curlE_scale, at);
          break;
        default:
          w.add(d.energy_residual, 1e-9, at);
          break;
      }
    }
  }
  Outcome o;
  o.pass = all_converged && w.ratio <= 1.0;
  o.detail = "worst measure/bound " + fmt(w.ratio) + " (" + w.where + ")" + (all_converged ? "" : ", unconverged run");
  return o;
}

Outcome criterion_curl_bound(const std::vector<CaseRun*>& zero_g, const std::vector<CaseRun*>& with_g) {
  Outcome o;
  double worst = 0.0;
  for (const CaseRun* r : zero_g) {
    const Diagnostics d = r->driver.diagnostics(r->state);
    const double lhs = d.hcurlB_norm / r->params.Rm;
    const double rhs = d.j_norm * (1 + 1e-8);
    if (rhs > 0.0) worst = std::max(worst, lhs / rhs);
    o.pass = o.pass && r->report.converged && lhs <= rhs;
  }
  double worst_g = 0.0;
  for (const CaseRun* r : with_g) {
    const Diagnostics d = r->driver.diagnostics(r->state);
    const double lhs = r->driver.reduced_equivalence_check(r->state).curl_source_norm;
    const double rhs = d.j_norm * (1 + 1e-8);
    worst_g = std::max(worst_g, lhs / rhs);
    o.pass = o.pass && r->report.converged && lhs <= rhs;
  }
  o.detail = "g=0: max Rm^-1 ||curl_h B|| / ||j|| " + fmt(worst) + "; g!=0: max ||Rm^-1 curl_h B + s^-1 Pg|| / ||j|| " +
             fmt(worst_g);
  return o;
}

Outcome criterion_reduced(const std::vector<CaseRun*>& zero_g, const std::vector<CaseRun*>& with_g) {
  Outcome o;
  double worst = 0.0;
  double worst_g = 0.0;
  for (const CaseRun* r : zero_g) {
    const ReducedCheck rc = r->driver.reduced_equivalence_check(r->state);
    const double bound = 1e-8 * rc.scale;
    if (bound > 0.0) worst = std::max(worst, rc.ohm_discrepancy / bound);
    o.pass = o.pass && r->report.converged && rc.ohm_discrepancy <= bound && rc.pythagoras_residual <= kTol;
  }
  for (const CaseRun* r : with_g) {
    const ReducedCheck rc = r->driver.reduced_equivalence_check(r->state);
    const double bound = 1e-8 * rc.scale;
    worst_g = std::max(worst_g, rc.ohm_source_residual / bound);
    o.pass = o.pass && r->report.converged && rc.ohm_source_residual <= bound;
  }
  o.detail = "g=0: max discrepancy / 1e-8 (||E|| + ||B||_d) " + fmt(worst) + "; g!=0 with s^-1 Pg: " + fmt(worst_g);
  return o;
}

Outcome criterion_variants() {
  Outcome o;
  std::ostringstream s;
  for (BcFamily fam : kFamilies) {
    for (int n : {2, 4}) {
      const MhdSpaces sp = MhdSpaces::build(make_domain(unit_cube_mesh(n)), fam);
      const MhdParams p = params_for(fam, Variant::multiplier);
      const ManufacturedCase mc = builtin_case(fam, kLambda, p);
      const VariantComparison vc = variant_equivalence(sp, p, mc.sources(), kTol, kMaxit);
      const bool ok = vc.multiplier_report.converged && vc.augmented_report.converged && vc.discrepancy <= 1e-8;
      o.pass = o.pass && ok;
      s << to_string(fam) << " n=" << n << " " << fmt(vc.discrepancy) << "; ";
    }
  }
  o.detail = s.str();
  return o;
}

Outcome criterion_picard() {
  Outcome o;
  const int n = 4;
  const BcFamily fam = BcFamily::normal_B;
  const MhdSpaces sp = MhdSpaces::build(make_domain(unit_cube_mesh(n)), fam);
  const MhdParams p = params_for(fam, Variant::multiplier);
  const ManufacturedCase mc = builtin_case(fam, kLambda, p);
  const MhdDriver driver(sp, p, mc.sources());
  const auto [a, ra] = driver.picard_solve(kTol, kMaxit);

  double worst_ratio = 0.0;
  // increments[k] belongs to iteration k+1; ratios from iteration 3 onward.
  for (std::size_t k = 2; k < ra.increments.size(); ++k) {
    worst_ratio = std::max(worst_ratio, ra.increments[k] / ra.increments[k - 1]);
  }
  const bool has_ratio = ra.increments.size() >= 3;

  MhdState init = MhdState::zero(sp, Variant::multiplier);
  init.u = canonical_interpolate(sp.velocity, VectorFn([](const Vec3& x) {
    return Vec3{std::sin(3 * x.y), x.x * x.z, 0.2};
  }));
  init.B = canonical_interpolate(sp.magnetic, VectorFn([](const Vec3&) { return Vec3{0.3, -0.1, 0.2}; }));
  const auto [b, rb] = driver.picard_solve(kTol, kMaxit, init);
  const double dist = driver.distance_W(a, b);
  const double bound = 10 * kTol * std::max(1.0, driver.norm_W(a.u, a.B));

  o.pass = ra.converged && rb.converged && has_ratio && worst_ratio < 0.9 && dist <= bound;
  std::ostringstream s;
  s << "iterations " << ra.iterations << "/" << rb.iterations << ", max ratio from it 3 " << fmt(worst_ratio)
    << ", guess distance " << fmt(dist) << " (bound " << fmt(bound) << ")";
  o.detail = s.str();
  return o;
}

Outcome criterion_rates() {
  Outcome o;
  std::ostringstream s;
  const std::vector<std::string> cols{"u_h1", "B_l2", "B_hcurl_h", "B_l3"};
  for (BcFamily fam : kFamilies) {
    StudyOptions opt;
    opt.family = fam;
    opt.params = params_for(fam, Variant::multiplier);
    opt.lambda = kLambda;
    opt.levels = {2, 4, 8};
    opt.tol = kTol;
    opt.maxit = kMaxit;
    const ErrorTable t = convergence_study(opt);
    s << to_string(fam) << ":";
    if (!t.all_converged) {
      o.pass = false;
      s << " " << t.failure << ";";
      continue;
    }
    for (const std::string& c : cols) {
      const double r = t.min_rate(c);
      o.pass = o.pass && r >= 0.9;
      s << " " << c << "=" << fmt(r);
    }
    s << ";";
  }
  o.detail = "min rates " + s.str();
  return o;
}

Outcome criterion_complex() {
  Outcome o;
  std::ostringstream s;
  for (int n : {1, 2}) {
    const ComplexReport rep = complex_check(unit_cube_mesh(n));
    const bool ok = rep.pass(kTol);
    o.pass = o.pass && ok;
    const double comm = std::max({rep.commuting_grad, rep.commuting_curl, rep.commuting_div});
    s << "n=" << n << " div.curl " << fmt(rep.div_curl_max) << " commuting " << fmt(comm) << " exact "
      << (rep.no_bc.exact && rep.essential.exact ? "yes" : "no") << "; ";
  }
  o.detail = s.str();
  return o;
}

Outcome criterion_l3() {
  Outcome o;
  std::ostringstream s;
  for (BcFamily fam : kFamilies) {
    const L3Table t = l3_study({2, 4, 8}, 50, fam, 42, 0.10);
    o.pass = o.pass && t.pass;
    s << to_string(fam) << " growth";
    for (double g : t.growth) s << " " << fmt(g);
    s << "; ";
  }
  o.detail = s.str();
  return o;
}

Outcome criterion_solver() {
  Outcome o;
  StudyOptions opt;
  opt.family = BcFamily::normal_B;
  opt.params = params_for(opt.family, Variant::multiplier);
  opt.lambda = kLambda;
  opt.levels = {2, 4, 8};
  opt.tol = kTol;
  opt.maxit = kMaxit;
  const std::vector<InfSupRow> rows = inf_sup_study(opt);
  std::ostringstream s;
  s << "sigma_min";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    o.pass = o.pass && rows[i].sigma_min > 0.0;
    s << " n=" << rows[i].n << ":" << fmt(rows[i].sigma_min);
    if (i > 0) {
      const double decay = rows[i].sigma_min / rows[i - 1].sigma_min;
      o.pass = o.pass && decay >= 0.5;
      s << " (ratio " << fmt(decay) << ")";
    }
  }
  const SolveStats st = solve_stats();
  o.pass = o.pass && st.max_residual <= 1e-10;
  s << "; " << st.count << " linear solves, max residual " << fmt(st.max_residual);
  o.detail = s.str();
  return o;
}

Outcome guarded(const std::function<Outcome()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {false, std::string("exception: ") + e.what()};
  }
}

}  // namespace

int main() {
  reset_solve_stats();
  bool all = true;
  const auto start = std::chrono::steady_clock::now();
  auto report = [&](int id, const char* name, const Outcome& o) {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2d %-22s %s [t=%.0fs]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
  };

  std::vector<std::unique_ptr<CaseRun>> with_g;
  std::vector<std::unique_ptr<CaseRun>> without_g;
  std::string setup_error;
  try {
    for (int n : {2, 4}) {
      for (BcFamily fam : kFamilies) {
        for (Variant var : kVariants) {
          with_g.push_back(std::make_unique<CaseRun>(n, fam, var, true));
          without_g.push_back(std::make_unique<CaseRun>(n, fam, var, false));
        }
      }
    }
  } catch (const std::exception& e) {
    setup_error = e.what();
  }
  std::vector<CaseRun*> runs_g;
  std::vector<CaseRun*> runs_0;
  for (auto& r : with_g) runs_g.push_back(r.get());
  for (auto& r : without_g) runs_0.push_back(r.get());
  auto on_runs = [&](const std::function<Outcome()>& f) {
    if (!setup_error.empty()) return Outcome{false, "solve failed: " + setup_error};
    return guarded(f);
  };

  report(1, "gauss_law", on_runs([&] { return criterion_invariants(runs_g, 1); }));
  report(2, "multiplier_curl_free", on_runs([&] { return criterion_invariants(runs_g, 2); }));
  report(3, "energy_identity", on_runs([&] { return criterion_invariants(runs_g, 3); }));
  report(4, "curl_bound", on_runs([&] { return criterion_curl_bound(runs_0, runs_g); }));
  report(5, "reduced_equivalence", on_runs([&] { return criterion_reduced(runs_0, runs_g); }));
  with_g.clear();
  without_g.clear();
  report(6, "variant_equivalence", guarded(criterion_variants));
  report(7, "picard_contraction", guarded(criterion_picard));
  report(8, "convergence_rates", guarded(criterion_rates));
  report(9, "complex_properties", guarded(criterion_complex));
  report(10, "l3_growth", guarded(criterion_l3));
  report(11, "solver_contract", guarded(criterion_solver));

  std::printf("%s\n", all ? "ALL PASS" : "SOME FAIL");
  return all ? 0 : 1;
}
