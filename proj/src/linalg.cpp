#include "mhd/linalg.hpp"

#include <umfpack.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>

namespace mhd {

SparseMatrix::SparseMatrix(int rows, int cols) : rows_(rows), cols_(cols), row_offsets_(rows + 1, 0) {}

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::span<const Triplet> triplets) {
  SparseMatrix m(rows, cols);
  std::vector<int> count(rows + 1, 0);
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw LinalgError("triplet (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                        ") outside shape " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    ++count[t.row + 1];
  }
  std::partial_sum(count.begin(), count.end(), count.begin());
  std::vector<std::pair<int, double>> bucket(triplets.size());
  std::vector<int> fill(count.begin(), count.end() - 1);
  for (const auto& t : triplets) bucket[fill[t.row]++] = {t.col, t.value};

  m.col_indices_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  for (int i = 0; i < rows; ++i) {
    auto first = bucket.begin() + count[i];
    auto last = bucket.begin() + count[i + 1];
    // Sorting by (col, value) makes duplicate sums independent of the input order.
    std::sort(first, last);
    for (auto it = first; it != last;) {
      const int col = it->first;
      double sum = 0.0;
      for (; it != last && it->first == col; ++it) sum += it->second;
      m.col_indices_.push_back(col);
      m.values_.push_back(sum);
    }
    m.row_offsets_[i + 1] = static_cast<int>(m.col_indices_.size());
  }
  return m;
}

double SparseMatrix::coeff(int i, int j) const {
  auto first = col_indices_.begin() + row_offsets_[i];
  auto last = col_indices_.begin() + row_offsets_[i + 1];
  auto it = std::lower_bound(first, last, j);
  return (it != last && *it == j) ? values_[it - col_indices_.begin()] : 0.0;
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(rows_, 0.0);
  for (int i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) s += values_[k] * x[col_indices_[k]];
    y[i] = s;
  }
  return y;
}

std::vector<double> SparseMatrix::multiply_transpose(std::span<const double> x) const {
  std::vector<double> y(cols_, 0.0);
  for (int i = 0; i < rows_; ++i) {
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) y[col_indices_[k]] += values_[k] * x[i];
  }
  return y;
}

double SparseMatrix::bilinear(std::span<const double> y, std::span<const double> x) const {
  double s = 0.0;
  for (int i = 0; i < rows_; ++i) {
    double row = 0.0;
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) row += values_[k] * x[col_indices_[k]];
    s += y[i] * row;
  }
  return s;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (int i = 0; i < rows_; ++i) {
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) t.push_back({col_indices_[k], i, values_[k]});
  }
  return from_triplets(cols_, rows_, t);
}

SparseMatrix SparseMatrix::scaled(double factor) const {
  SparseMatrix m = *this;
  for (auto& v : m.values_) v *= factor;
  return m;
}

std::vector<double> SparseMatrix::to_dense() const {
  std::vector<double> d(static_cast<std::size_t>(rows_) * cols_, 0.0);
  for (int i = 0; i < rows_; ++i) {
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      d[static_cast<std::size_t>(i) * cols_ + col_indices_[k]] = values_[k];
    }
  }
  return d;
}

void SparseMatrix::append_triplets(std::vector<Triplet>& out, int row_offset, int col_offset, double factor) const {
  for (int i = 0; i < rows_; ++i) {
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      out.push_back({row_offset + i, col_offset + col_indices_[k], factor * values_[k]});
    }
  }
}

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double b_factor) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw LinalgError("add: shape mismatch");
  std::vector<Triplet> t;
  t.reserve(a.nnz() + b.nnz());
  a.append_triplets(t, 0, 0);
  b.append_triplets(t, 0, 0, b_factor);
  return SparseMatrix::from_triplets(a.rows(), a.cols(), t);
}

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.cols() != b.rows()) throw LinalgError("multiply: inner dimensions differ");
  std::vector<Triplet> t;
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k) {
      const int j = a.col_indices()[k];
      for (int l = b.row_offsets()[j]; l < b.row_offsets()[j + 1]; ++l) {
        t.push_back({i, b.col_indices()[l], a.values()[k] * b.values()[l]});
      }
    }
  }
  return SparseMatrix::from_triplets(a.rows(), b.cols(), t);
}

// UMFPACK works on compressed columns; the CSR arrays of A are the CSC arrays of A^T, so A is
// factored as its transpose and the solve modes are swapped accordingly.
struct LuFactorization::Impl {
  int n = 0;
  std::vector<long> ap;
  std::vector<long> ai;
  std::vector<double> ax;
  void* numeric = nullptr;
  double control[UMFPACK_CONTROL];

  ~Impl() {
    if (numeric) umfpack_dl_free_numeric(&numeric);
  }

  std::vector<double> run(int sys, std::span<const double> b) const {
    if (static_cast<int>(b.size()) != n) throw LinalgError("solve: rhs size mismatch");
    std::vector<double> x(n, 0.0);
    if (n == 0) return x;
    double info[UMFPACK_INFO];
    const int status = umfpack_dl_solve(sys, ap.data(), ai.data(), ax.data(), x.data(), b.data(), numeric,
                                        control, info);
    if (status != UMFPACK_OK && status != UMFPACK_WARNING_singular_matrix) {
      throw LinalgError("umfpack solve failed with status " + std::to_string(status));
    }
    return x;
  }
};

LuFactorization::LuFactorization(const SparseMatrix& a) : impl_(std::make_unique<Impl>()) {
  if (a.rows() != a.cols()) throw LinalgError("LU: matrix is not square");
  auto& m = *impl_;
  m.n = a.rows();
  m.ap.assign(a.row_offsets().begin(), a.row_offsets().end());
  m.ai.assign(a.col_indices().begin(), a.col_indices().end());
  m.ax = a.values();
  umfpack_dl_defaults(m.control);
  m.control[UMFPACK_STRATEGY] = UMFPACK_STRATEGY_SYMMETRIC;
  m.control[UMFPACK_ORDERING] = UMFPACK_ORDERING_METIS;
  if (m.n == 0) return;

  double info[UMFPACK_INFO];
  void* symbolic = nullptr;
  long status = umfpack_dl_symbolic(m.n, m.n, m.ap.data(), m.ai.data(), m.ax.data(), &symbolic, m.control, info);
  if (status != UMFPACK_OK) {
    if (symbolic) umfpack_dl_free_symbolic(&symbolic);
    throw LinalgError("umfpack symbolic analysis failed with status " + std::to_string(status));
  }
  status = umfpack_dl_numeric(m.ap.data(), m.ai.data(), m.ax.data(), symbolic, &m.numeric, m.control, info);
  umfpack_dl_free_symbolic(&symbolic);
  if (status == UMFPACK_WARNING_singular_matrix) {
    // Locate the first zero pivot of U and report it in the original column numbering of A.
    std::vector<double> udiag(m.n);
    std::vector<long> p(m.n), q(m.n);
    umfpack_dl_get_numeric(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, p.data(), q.data(),
                           udiag.data(), nullptr, nullptr, m.numeric);
    int pivot = 0;
    for (int k = 0; k < m.n; ++k) {
      if (udiag[k] == 0.0) {
        pivot = static_cast<int>(p[k]);
        break;
      }
    }
    throw SingularMatrixError("matrix is singular (zero pivot for unknown " + std::to_string(pivot) + ")", pivot);
  }
  if (status != UMFPACK_OK) {
    throw LinalgError("umfpack numeric factorization failed with status " + std::to_string(status));
  }
}

LuFactorization::~LuFactorization() = default;
LuFactorization::LuFactorization(LuFactorization&&) noexcept = default;
LuFactorization& LuFactorization::operator=(LuFactorization&&) noexcept = default;

int LuFactorization::size() const { return impl_->n; }

std::vector<double> LuFactorization::solve(std::span<const double> b) const { return impl_->run(UMFPACK_At, b); }

std::vector<double> LuFactorization::solve_transpose(std::span<const double> b) const {
  return impl_->run(UMFPACK_A, b);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double relative_residual(const SparseMatrix& a, std::span<const double> x, std::span<const double> b) {
  auto r = a.multiply(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return norm2(r) / std::max(norm2(b), std::numeric_limits<double>::min());
}

namespace {

std::mutex stats_mutex;
SolveStats stats;

void record_solve(double residual) {
  std::lock_guard<std::mutex> lock(stats_mutex);
  ++stats.count;
  if (!(residual <= stats.max_residual)) stats.max_residual = residual;
}

}  // namespace

SolveStats solve_stats() {
  std::lock_guard<std::mutex> lock(stats_mutex);
  return stats;
}

void reset_solve_stats() {
  std::lock_guard<std::mutex> lock(stats_mutex);
  stats = SolveStats{};
}

std::vector<double> checked_solve(const LuFactorization& lu, const SparseMatrix& a, std::span<const double> b) {
  auto x = lu.solve(b);
  const double res = relative_residual(a, x, b);
  record_solve(res);
  if (!(res <= kSolveResidualTolerance)) {
    throw LinalgError("direct solve residual " + std::to_string(res) + " exceeds tolerance");
  }
  return x;
}

std::vector<double> solve_direct(const SparseMatrix& a, std::span<const double> b) {
  LuFactorization lu(a);
  return checked_solve(lu, a, b);
}

int BlockSystem::add_field(const std::string& name, int size) {
  field_names.push_back(name);
  field_sizes.push_back(size);
  rhs.emplace_back(size, 0.0);
  return static_cast<int>(field_names.size()) - 1;
}

int BlockSystem::field(const std::string& name) const {
  auto it = std::find(field_names.begin(), field_names.end(), name);
  if (it == field_names.end()) throw LinalgError("unknown field '" + name + "'");
  return static_cast<int>(it - field_names.begin());
}

void BlockSystem::add_block(int test, int trial, const SparseMatrix& m, double factor) {
  if (m.rows() != field_sizes.at(test) || m.cols() != field_sizes.at(trial)) {
    throw LinalgError("block (" + field_names[test] + "," + field_names[trial] + ") has inconsistent shape");
  }
  auto key = std::make_pair(test, trial);
  auto it = blocks.find(key);
  if (it == blocks.end()) {
    blocks.emplace(key, factor == 1.0 ? m : m.scaled(factor));
  } else {
    it->second = add(it->second, m, factor);
  }
}

void BlockSystem::add_border(int f, std::vector<double> weights) {
  if (static_cast<int>(weights.size()) != field_sizes.at(f)) throw LinalgError("border weight size mismatch");
  borders.push_back({f, std::move(weights)});
}

std::vector<std::vector<double>> IndexMap::split(std::span<const double> x) const {
  std::vector<std::vector<double>> out;
  for (std::size_t f = 0; f < offsets.size(); ++f) {
    out.emplace_back(x.begin() + offsets[f], x.begin() + offsets[f] + sizes[f]);
  }
  out.emplace_back(x.begin() + border_offset, x.begin() + total);
  return out;
}

std::vector<double> IndexMap::join(const std::vector<std::vector<double>>& fields) const {
  std::vector<double> x(total, 0.0);
  for (std::size_t f = 0; f < fields.size() && f <= offsets.size(); ++f) {
    const int off = f < offsets.size() ? offsets[f] : border_offset;
    std::copy(fields[f].begin(), fields[f].end(), x.begin() + off);
  }
  return x;
}

FlatSystem flatten(const BlockSystem& sys) {
  if (sys.rhs.size() != sys.field_sizes.size()) throw LinalgError("flatten: rhs segments inconsistent");
  FlatSystem out;
  auto& map = out.map;
  int off = 0;
  for (std::size_t f = 0; f < sys.field_sizes.size(); ++f) {
    if (static_cast<int>(sys.rhs[f].size()) != sys.field_sizes[f]) {
      throw LinalgError("flatten: rhs for field '" + sys.field_names[f] + "' has wrong size");
    }
    map.offsets.push_back(off);
    map.sizes.push_back(sys.field_sizes[f]);
    off += sys.field_sizes[f];
  }
  map.border_offset = off;
  map.total = off + static_cast<int>(sys.borders.size());

  std::size_t nnz = 0;
  for (const auto& [key, m] : sys.blocks) nnz += m.nnz();
  std::vector<Triplet> t;
  t.reserve(nnz + 2 * off);
  for (const auto& [key, m] : sys.blocks) {
    if (m.rows() != sys.field_sizes[key.first] || m.cols() != sys.field_sizes[key.second]) {
      throw LinalgError("flatten: inconsistent block shape");
    }
    m.append_triplets(t, map.offsets[key.first], map.offsets[key.second]);
  }
  for (std::size_t k = 0; k < sys.borders.size(); ++k) {
    const auto& b = sys.borders[k];
    const int row = map.border_offset + static_cast<int>(k);
    for (int i = 0; i < static_cast<int>(b.weights.size()); ++i) {
      t.push_back({row, map.offsets[b.field] + i, b.weights[i]});
      t.push_back({map.offsets[b.field] + i, row, b.weights[i]});
    }
  }
  out.matrix = SparseMatrix::from_triplets(map.total, map.total, t);
  out.rhs.assign(map.total, 0.0);
  for (std::size_t f = 0; f < sys.rhs.size(); ++f) {
    std::copy(sys.rhs[f].begin(), sys.rhs[f].end(), out.rhs.begin() + map.offsets[f]);
  }
  return out;
}

void write_matrix_market(const SparseMatrix& a, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
  out << std::setprecision(17);
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k) {
      out << i + 1 << ' ' << a.col_indices()[k] + 1 << ' ' << a.values()[k] << '\n';
    }
  }
}

}  // namespace mhd
