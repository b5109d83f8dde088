#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mhd/assembly.hpp"
#include "mhd/manufactured.hpp"
#include "mhd/mesh.hpp"
#include "mhd/mhd.hpp"

namespace mhd {

/// Errors of one discrete solution against a manufactured case.
struct ErrorRow {
  int n = 0;
  double h = 0.0;
  double err_u_h1 = 0.0;         ///< ||grad(u - u_h)||
  double err_u_proj_h1 = 0.0;    ///< ||grad(P^V u - u_h)||
  double err_B_l2 = 0.0;         ///< ||B - B_h||
  double err_B_hcurl_h = 0.0;    ///< ||curl_h(P^D B - B_h)||
  double err_B_l3 = 0.0;         ///< ||P^D B - B_h||_{0,3}
  double err_E_l2 = 0.0;
  double err_p_l2 = 0.0;
  /// Largest relative change of the analytic error norms when the measuring degree is raised by one.
  double measure_drift = 0.0;
  bool converged = false;
  int iterations = 0;
};

inline const std::vector<std::string>& error_columns() {
  static const std::vector<std::string> cols{"u_h1", "B_l2", "B_hcurl_h", "B_l3", "E_l2", "p_l2"};
  return cols;
}

double error_value(const ErrorRow& row, const std::string& column);

ErrorRow error_norms(const MhdState& state, const ManufacturedCase& mc, const MhdDriver& driver,
                     int measure_degree = 6);

struct ErrorTable {
  std::vector<ErrorRow> rows;
  /// rates[i][c] is the observed order between rows i and i+1 for error_columns()[c].
  std::vector<std::vector<double>> rates;
  std::vector<PicardReport> reports;
  bool all_converged = false;
  std::string failure;

  double min_rate(const std::string& column) const;
};

struct StudyOptions {
  BcFamily family = BcFamily::normal_B;
  Variant variant = Variant::multiplier;
  MhdParams params;
  double lambda = 0.1;
  std::vector<int> levels{2, 4, 8};
  double tol = 1e-10;
  int maxit = 50;
  int measure_degree = 6;
  QuadDegrees quad;
};

/// Solves the builtin case on unit_cube_mesh(n) for each level. Stops at the first level whose
/// Picard iteration does not converge and records it in `failure`.
ErrorTable convergence_study(const StudyOptions& options);

void write_error_csv(const ErrorTable& table, std::ostream& out);

/// Dimension counts of the discrete complex with and without boundary conditions.
struct ComplexDimensions {
  int vertices = 0, edges = 0, faces = 0, cells = 0;
  int rank_grad = 0, rank_curl = 0, rank_div = 0;
  int kernel_grad = 0, kernel_curl = 0, kernel_div = 0;
  /// Exactness: ker grad = constants (or 0), ker curl = range grad, ker div = range curl,
  /// div onto all cells (or onto zero-mean fields).
  bool exact = false;
};

struct ComplexReport {
  double div_curl_max = 0.0;
  double curl_grad_max = 0.0;
  double commuting_grad = 0.0;
  double commuting_curl = 0.0;
  double commuting_div = 0.0;
  /// Commuting residual for a smooth non-polynomial field (quadrature-limited).
  double commuting_smooth = 0.0;
  ComplexDimensions no_bc;
  ComplexDimensions essential;

  bool pass(double tol = 1e-10) const;
};

ComplexReport complex_check(const Mesh& mesh);

/// Rank by Gaussian elimination with partial pivoting on a dense copy.
int dense_rank(const SparseMatrix& a, double rel_tol = 1e-9);

struct L3Row {
  int n = 0;
  double h = 0.0;
  int samples = 0;
  double max_ratio_l3 = 0.0;
  double min_ratio_l3 = 0.0;
  double max_ratio_poincare = 0.0;
};

struct L3Table {
  BcFamily family = BcFamily::normal_B;
  std::vector<L3Row> rows;
  /// max_ratio_l3 growth factors between consecutive levels.
  std::vector<double> growth;
  std::vector<double> growth_poincare;
  bool pass = false;
};

/// Random samples d = curl F with standard normal free coefficients of F, normalized.
L3Table l3_study(const std::vector<int>& levels, int samples, BcFamily family, std::uint64_t seed = 42,
                 double slack = 0.10);

struct InfSupRow {
  int n = 0;
  double sigma_min = 0.0;
};

/// Smallest singular value proxy of the converged Picard matrix of the builtin case per level.
std::vector<InfSupRow> inf_sup_study(const StudyOptions& options);

}  // namespace mhd
