#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mhd/assembly.hpp"
#include "mhd/derham.hpp"
#include "mhd/linalg.hpp"
#include "mhd/operators.hpp"

namespace mhd {

enum class BcFamily { normal_B, tangential_B };
enum class Variant { multiplier, augmented };

const char* to_string(BcFamily f);
const char* to_string(Variant v);
BcFamily parse_bc_family(const std::string& s);
Variant parse_variant(const std::string& s);

struct MhdParams {
  double Re = 1.0;
  double Rm = 1.0;
  double s = 1.0;
  BcFamily bc_family = BcFamily::normal_B;
  Variant variant = Variant::multiplier;

  double alpha() const { return s / Rm; }
  /// Throws std::invalid_argument unless Re, Rm, s are finite and positive.
  void validate() const;
};

/// Body force f and optional magnetic source g paired with the curl-space test function.
/// Empty callables mean zero.
struct SourceData {
  VectorFn f;
  VectorFn g;
};

/// Velocity, pressure, electric, magnetic and multiplier spaces of one boundary family.
struct MhdSpaces {
  std::shared_ptr<const Domain> domain;
  BcFamily family = BcFamily::normal_B;
  SpacePtr velocity;
  SpacePtr pressure;
  SpacePtr electric;
  SpacePtr magnetic;
  SpacePtr multiplier;

  /// normal_B: E in H0(curl), B in H0(div), r zero-mean. tangential_B: no conditions on E, B and
  /// r ranging over all piecewise constants.
  static MhdSpaces build(std::shared_ptr<const Domain> domain, BcFamily family);
};

struct MhdState {
  FieldFunction u;
  FieldFunction E;
  FieldFunction B;
  FieldFunction p;
  /// Absent in the augmented variant.
  std::optional<FieldFunction> r;

  static MhdState zero(const MhdSpaces& spaces, Variant variant);
};

struct Diagnostics {
  /// |Re^-1 ||grad u||^2 + s ||j||^2 - <f,u> - <g,E>| relative to the larger side.
  double energy_residual = 0.0;
  double energy_lhs = 0.0;
  double energy_rhs = 0.0;
  double divB_max = 0.0;
  /// max(1, ||B||_div), the scale of the Gauss-law tolerance.
  double divB_scale = 1.0;
  double r_norm = 0.0;
  double curlE_norm = 0.0;
  /// max(1, ||E||_curl).
  double curlE_scale = 1.0;
  double j_norm = 0.0;
  double hcurlB_norm = 0.0;
  double grad_u_norm = 0.0;
  double E_norm = 0.0;
  double B_norm_d = 0.0;
  /// Discrete dual norm of f over the velocity space.
  double f_dual_norm = 0.0;
  /// Left side of the second energy bound divided by its right side.
  double energy2_ratio = 0.0;
  /// ||curl_h B|| / (Re^1/2 Rm s^-1/2 ||f||_-1,h).
  double energy4_ratio = 0.0;
  /// ||E|| / (Re^3/2 Rm s^-1/2 ||f||_-1,h^2).
  double energy5_ratio = 0.0;
};

struct PicardReport {
  int iterations = 0;
  bool converged = false;
  /// ||(u^n - u^{n-1}, B^n - B^{n-1})||_W per iteration.
  std::vector<double> increments;
  /// ||E^n - E^{n-1} + (u^n - u^{n-1}) x B^{n-1}|| per iteration.
  std::vector<double> increments_E;
  std::vector<double> linear_residuals;
  /// Diagnostics of each iterate, with j = E^n + u^n x B^{n-1}.
  std::vector<Diagnostics> history;
};

struct ReducedCheck {
  /// ||E + P(u x B) - Rm^-1 curl_h B||.
  double ohm_discrepancy = 0.0;
  /// | ||phi||^2 - ||P phi||^2 - ||phi - P phi||^2 | / ||phi||^2 for phi = u x B.
  double pythagoras_residual = 0.0;
  /// ||E + P(u x B) - Rm^-1 curl_h B - s^-1 P g||, zero at a solution for any g.
  double ohm_source_residual = 0.0;
  /// ||Rm^-1 curl_h B + s^-1 P g||, bounded by ||j|| at a solution.
  double curl_source_norm = 0.0;
  /// ||E|| + ||B||_d.
  double scale = 0.0;

  double max_discrepancy() const;
};

/// Picard driver. Owns the spaces, the parameter-independent blocks and the source loads.
class MhdDriver {
 public:
  MhdDriver(MhdSpaces spaces, MhdParams params, SourceData sources, QuadDegrees quad = {});

  const MhdSpaces& spaces() const { return spaces_; }
  const MhdParams& params() const { return params_; }
  const QuadDegrees& quad() const { return quad_; }
  const DiscreteCurl& curl() const { return *curl_; }
  const std::vector<double>& f_load() const { return f_load_; }
  const std::vector<double>& g_load() const { return g_load_; }

  BlockSystem assemble_picard_step(const FieldFunction& u_prev, const FieldFunction& b_prev) const;
  /// Solves a flattened Picard system; `residual` receives the relative residual.
  MhdState solve_step(const BlockSystem& system, double* residual = nullptr) const;

  std::pair<MhdState, PicardReport> picard_solve(double tol, int maxit,
                                                 const std::optional<MhdState>& init = std::nullopt) const;

  /// Diagnostics with j = E + u x b_prev.
  Diagnostics diagnostics(const MhdState& state, const FieldFunction& b_prev) const;
  Diagnostics diagnostics(const MhdState& state) const { return diagnostics(state, state.B); }

  ReducedCheck reduced_equivalence_check(const MhdState& state) const;

  double norm_W(const FieldFunction& u, const FieldFunction& b) const;
  /// Weighted distance ||(u1-u2, B1-B2)||_W.
  double distance_W(const MhdState& a, const MhdState& b) const;

  /// Gram matrix of ||u||_1, ||E||_curl, ||B||_div, ||p||, ||r|| in flattened ordering.
  SparseMatrix gram_matrix(const FlatSystem& layout) const;

 private:
  MhdSpaces spaces_;
  MhdParams params_;
  SourceData sources_;
  QuadDegrees quad_;
  std::unique_ptr<DiscreteCurl> curl_;
  SparseMatrix stiffness_;
  SparseMatrix div_pressure_;
  SparseMatrix mass_E_;
  SparseMatrix pairing_;
  SparseMatrix weak_curl_;
  SparseMatrix div_scalar_;
  SparseMatrix divdiv_;
  std::vector<double> f_load_;
  std::vector<double> g_load_;
  double f_dual_norm_ = 0.0;
};

/// Smallest singular value of `a` measured in the norm of `gram`, by inverse iteration on
/// A^-1 G A^-T G. Returns sigma_min.
double smallest_singular_value(const SparseMatrix& a, const SparseMatrix& gram, int max_iterations = 200,
                               double tol = 1e-8);

struct VariantComparison {
  MhdState multiplier;
  MhdState augmented;
  PicardReport multiplier_report;
  PicardReport augmented_report;
  /// max over (u,B) in W, E in L2, p in L2 of the difference relative to max(1, norm).
  double discrepancy = 0.0;
};

VariantComparison variant_equivalence(const MhdSpaces& spaces, MhdParams params, const SourceData& sources,
                                      double tol, int maxit = 50);

}  // namespace mhd
