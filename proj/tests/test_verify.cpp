#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "mhd/operators.hpp"
#include "mhd/verify.hpp"

using namespace mhd;

namespace {

MhdParams family_params(BcFamily fam) {
  MhdParams p;
  p.bc_family = fam;
  return p;
}

double l2_error(const Domain& d, const VectorFn& exact, const FieldFunction& f) {
  return std::sqrt(integrate(d, 8, [&](int c, const std::array<double, 4>& l, const Vec3& x) {
    const Vec3 e = exact(x) - f.evaluate(c, l).value;
    return dot(e, e);
  }));
}

}  // namespace

TEST(ErrorNorms, InterpolantsGiveInterpolationErrors) {
  const BcFamily fam = BcFamily::normal_B;
  const MhdParams p = family_params(fam);
  const ManufacturedCase mc = builtin_case(fam, 0.5, p);
  const MhdSpaces sp = MhdSpaces::build(make_domain(unit_cube_mesh(2)), fam);
  const MhdDriver driver(sp, p, mc.sources());
  MhdState st = MhdState::zero(sp, Variant::multiplier);
  st.u = canonical_interpolate(sp.velocity, mc.u);
  st.B = canonical_interpolate(sp.magnetic, mc.B);
  st.E = canonical_interpolate(sp.electric, mc.E);
  st.p = canonical_interpolate(sp.pressure, mc.p);
  const ErrorRow row = error_norms(st, mc, driver, 6);
  const Domain& d = *sp.domain;
  EXPECT_NEAR(row.err_B_l2, l2_error(d, mc.B, st.B), 1e-4 * row.err_B_l2);
  EXPECT_NEAR(row.err_E_l2, l2_error(d, mc.E, st.E), 1e-4 * row.err_E_l2);
  const double pe = std::sqrt(integrate(d, 8, [&](int c, const std::array<double, 4>& l, const Vec3& x) {
    const double e = mc.p(x) - st.p.evaluate(c, l).value.x;
    return e * e;
  }));
  EXPECT_NEAR(row.err_p_l2, pe, 1e-4 * pe);
  EXPECT_LT(row.measure_drift, 1e-2);
}

TEST(ErrorNorms, SmokeAndRefinement) {
  for (BcFamily fam : {BcFamily::normal_B, BcFamily::tangential_B}) {
    StudyOptions o;
    o.family = fam;
    o.params = family_params(fam);
    o.levels = {2, 4};
    const ErrorTable t = convergence_study(o);
    ASSERT_TRUE(t.all_converged);
    ASSERT_EQ(t.rows.size(), 2u);
    for (const ErrorRow& r : t.rows)
      for (const std::string& c : error_columns()) {
        EXPECT_TRUE(std::isfinite(error_value(r, c)));
        EXPECT_GT(error_value(r, c), 0.0);
      }
    EXPECT_LT(t.rows[1].err_B_l2, t.rows[0].err_B_l2);
    EXPECT_EQ(t.rates.size(), 1u);
  }
}

TEST(ErrorNorms, ErrorsScaleLinearlyInSourceSize) {
  const BcFamily fam = BcFamily::normal_B;
  StudyOptions o;
  o.params = family_params(fam);
  o.levels = {2};
  o.lambda = 0.05;
  const ErrorRow a = convergence_study(o).rows.at(0);
  o.lambda = 0.1;
  const ErrorRow b = convergence_study(o).rows.at(0);
  for (const std::string& c : {"B_l2", "B_hcurl_h", "E_l2", "p_l2", "u_h1"}) {
    const double ratio = error_value(b, c) / error_value(a, c);
    EXPECT_NEAR(ratio, 2.0, 0.5) << c;
  }
}

TEST(ErrorCsv, HeaderAndEmptyFirstRates) {
  ErrorTable t;
  ErrorRow r;
  r.n = 2;
  r.h = 0.5;
  r.err_u_h1 = r.err_B_l2 = r.err_B_hcurl_h = r.err_B_l3 = r.err_E_l2 = r.err_p_l2 = 0.25;
  t.rows.push_back(r);
  r.n = 4;
  r.h = 0.25;
  r.err_u_h1 = r.err_B_l2 = r.err_B_hcurl_h = r.err_B_l3 = r.err_E_l2 = r.err_p_l2 = 0.125;
  t.rows.push_back(r);
  t.rates.push_back(std::vector<double>(6, 1.0));
  std::ostringstream out;
  write_error_csv(t, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line,
            "n,h,err_u_h1,err_B_l2,err_B_hcurl_h,err_B_l3,err_E_l2,err_p_l2,rate_u_h1,rate_B_l2,rate_B_hcurl_h,"
            "rate_B_l3,rate_E_l2,rate_p_l2");
  std::getline(in, line);
  EXPECT_EQ(line.substr(line.size() - 6), ",,,,,,");
  std::getline(in, line);
  EXPECT_NE(line.find("1.0000000000e+00"), std::string::npos);
  EXPECT_DOUBLE_EQ(t.min_rate("B_l3"), 1.0);
  EXPECT_THROW(t.min_rate("nope"), std::invalid_argument);
}

TEST(Complex, ExactOnSmallMeshes) {
  for (int n : {1, 2}) {
    const ComplexReport r = complex_check(unit_cube_mesh(n));
    EXPECT_EQ(r.div_curl_max, 0.0);
    EXPECT_EQ(r.curl_grad_max, 0.0);
    EXPECT_LE(r.commuting_grad, 1e-12);
    EXPECT_LE(r.commuting_curl, 1e-12);
    EXPECT_LE(r.commuting_div, 1e-12);
    EXPECT_TRUE(r.no_bc.exact);
    EXPECT_TRUE(r.essential.exact);
    EXPECT_TRUE(r.pass());
    EXPECT_EQ(r.no_bc.kernel_grad, 1);
    EXPECT_EQ(r.no_bc.rank_div, r.no_bc.cells);
    EXPECT_EQ(r.essential.kernel_grad, 0);
    EXPECT_EQ(r.essential.rank_div, r.essential.cells - 1);
  }
  const ComplexDimensions d = complex_check(unit_cube_mesh(1)).no_bc;
  EXPECT_EQ(d.vertices, 8);
  EXPECT_EQ(d.edges, 19);
  EXPECT_EQ(d.faces, 18);
  EXPECT_EQ(d.cells, 6);
}

TEST(Complex, SmoothResidualDropsWithRefinement) {
  const double a = complex_check(unit_cube_mesh(1)).commuting_smooth;
  const double b = complex_check(unit_cube_mesh(2)).commuting_smooth;
  EXPECT_GT(a, 0.0);
  EXPECT_LT(b, a);
}

TEST(Rank, KnownMatrices) {
  const std::vector<Triplet> t{{0, 0, 1}, {0, 1, 2}, {1, 0, 2}, {1, 1, 4}, {2, 2, 1}};
  EXPECT_EQ(dense_rank(SparseMatrix::from_triplets(3, 3, t)), 2);
  EXPECT_EQ(dense_rank(SparseMatrix(3, 4)), 0);
  const std::vector<Triplet> id{{0, 0, 1}, {1, 1, 1}};
  EXPECT_EQ(dense_rank(SparseMatrix::from_triplets(2, 5, id)), 2);
}

TEST(L3, TwoLevelStudyPasses) {
  for (BcFamily fam : {BcFamily::normal_B, BcFamily::tangential_B}) {
    const L3Table t = l3_study({2, 4}, 50, fam);
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_TRUE(t.pass);
    for (const L3Row& r : t.rows) {
      EXPECT_EQ(r.samples, 50);
      EXPECT_GT(r.max_ratio_l3, 0.0);
      EXPECT_LE(r.min_ratio_l3, r.max_ratio_l3);
    }
  }
}

TEST(L3, DeterministicForSeedAndRejectsNoSamples) {
  const L3Table a = l3_study({2, 4}, 5, BcFamily::normal_B, 7);
  const L3Table b = l3_study({2, 4}, 5, BcFamily::normal_B, 7);
  for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(a.rows[i].max_ratio_l3, b.rows[i].max_ratio_l3);
  EXPECT_THROW(l3_study({2, 4}, 0, BcFamily::normal_B), std::invalid_argument);
}

TEST(InfSup, PositiveOnTwoLevels) {
  StudyOptions o;
  o.levels = {2, 4};
  const auto rows = inf_sup_study(o);
  ASSERT_EQ(rows.size(), 2u);
  for (const InfSupRow& r : rows) EXPECT_GT(r.sigma_min, 0.0);
}
