#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mhd {

class LinalgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structural or numerical singularity detected during factorization.
class SingularMatrixError : public LinalgError {
 public:
  SingularMatrixError(const std::string& what, int pivot) : LinalgError(what), pivot_(pivot) {}
  int pivot() const { return pivot_; }

 private:
  int pivot_;
};

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Compressed sparse row matrix. Column indices are sorted and unique within each row.
/// Explicit zeros are kept so that repeated assemblies share one sparsity pattern.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols);

  /// Sums duplicates; the result does not depend on the order of `triplets`.
  static SparseMatrix from_triplets(int rows, int cols, std::span<const Triplet> triplets);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int nnz() const { return static_cast<int>(values_.size()); }

  const std::vector<int>& row_offsets() const { return row_offsets_; }
  const std::vector<int>& col_indices() const { return col_indices_; }
  const std::vector<double>& values() const { return values_; }

  double coeff(int i, int j) const;

  std::vector<double> multiply(std::span<const double> x) const;
  std::vector<double> multiply_transpose(std::span<const double> x) const;
  /// y^T A x
  double bilinear(std::span<const double> y, std::span<const double> x) const;

  SparseMatrix transpose() const;
  SparseMatrix scaled(double factor) const;
  std::vector<double> to_dense() const;

  void append_triplets(std::vector<Triplet>& out, int row_offset, int col_offset, double factor = 1.0) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_offsets_{0};
  std::vector<int> col_indices_;
  std::vector<double> values_;
};

inline SparseMatrix from_triplets(std::span<const Triplet> triplets, int rows, int cols) {
  return SparseMatrix::from_triplets(rows, cols, triplets);
}

/// Sum of two matrices of equal shape.
SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double b_factor = 1.0);

/// Sparse product a * b.
SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b);

/// Sparse LU with partial pivoting (UMFPACK). Immutable once constructed; solves are reentrant.
class LuFactorization {
 public:
  explicit LuFactorization(const SparseMatrix& a);
  ~LuFactorization();
  LuFactorization(LuFactorization&&) noexcept;
  LuFactorization& operator=(LuFactorization&&) noexcept;
  LuFactorization(const LuFactorization&) = delete;
  LuFactorization& operator=(const LuFactorization&) = delete;

  int size() const;
  std::vector<double> solve(std::span<const double> b) const;
  std::vector<double> solve_transpose(std::span<const double> b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

inline constexpr double kSolveResidualTolerance = 1e-10;

double relative_residual(const SparseMatrix& a, std::span<const double> x, std::span<const double> b);

/// Direct solve; throws LinalgError if the relative residual exceeds kSolveResidualTolerance.
std::vector<double> solve_direct(const SparseMatrix& a, std::span<const double> b);

/// Process-wide record of checked solves: how many ran and the worst relative residual seen.
struct SolveStats {
  long count = 0;
  double max_residual = 0.0;
};
SolveStats solve_stats();
void reset_solve_stats();

/// Solution of an already factored system with the same residual contract as solve_direct.
std::vector<double> checked_solve(const LuFactorization& lu, const SparseMatrix& a, std::span<const double> b);

/// Block-structured linear system. Blocks are keyed by (test field, trial field). A border adds one
/// scalar unknown and one equation: sum_i w_i x_i = 0 for the named field, with the transposed column.
struct BlockSystem {
  struct Border {
    int field = 0;
    std::vector<double> weights;
  };

  std::vector<std::string> field_names;
  std::vector<int> field_sizes;
  std::map<std::pair<int, int>, SparseMatrix> blocks;
  std::vector<std::vector<double>> rhs;
  std::vector<Border> borders;

  int add_field(const std::string& name, int size);
  int field(const std::string& name) const;
  /// Adds `m` into block (test, trial), creating it if absent.
  void add_block(int test, int trial, const SparseMatrix& m, double factor = 1.0);
  void add_border(int field, std::vector<double> weights);
};

struct IndexMap {
  std::vector<int> offsets;
  std::vector<int> sizes;
  int border_offset = 0;
  int total = 0;

  std::vector<std::vector<double>> split(std::span<const double> x) const;
  std::vector<double> join(const std::vector<std::vector<double>>& fields) const;
};

struct FlatSystem {
  SparseMatrix matrix;
  std::vector<double> rhs;
  IndexMap map;
};

/// Global ordering: fields in declaration order, then border unknowns.
FlatSystem flatten(const BlockSystem& system);

void write_matrix_market(const SparseMatrix& a, std::ostream& out);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace mhd
