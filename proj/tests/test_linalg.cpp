#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "mhd/linalg.hpp"

using namespace mhd;

namespace {

/// Dense Gaussian elimination with partial pivoting, row-major.
std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a[i * n + k]) > std::abs(a[p * n + k])) p = i;
    for (int j = 0; j < n; ++j) std::swap(a[k * n + j], a[p * n + j]);
    std::swap(b[k], b[p]);
    for (int i = k + 1; i < n; ++i) {
      const double f = a[i * n + k] / a[k * n + k];
      for (int j = k; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= a[i * n + j] * x[j];
    x[i] = s / a[i * n + i];
  }
  return x;
}

SparseMatrix random_spd(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<double> b(n * n);
  for (double& v : b) v = g(rng);
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = i == j ? n : 0.0;
      for (int k = 0; k < n; ++k) s += b[i * n + k] * b[j * n + k];
      t.push_back({i, j, s});
    }
  return SparseMatrix::from_triplets(n, n, t);
}

}  // namespace

TEST(Triplets, DuplicatesSum) {
  const std::vector<Triplet> t{{0, 0, 1.0}, {0, 0, 2.0}};
  const SparseMatrix a = SparseMatrix::from_triplets(1, 1, t);
  EXPECT_EQ(a.nnz(), 1);
  EXPECT_DOUBLE_EQ(a.coeff(0, 0), 3.0);
}

TEST(Triplets, Empty) {
  const SparseMatrix a = SparseMatrix::from_triplets(3, 2, {});
  EXPECT_EQ(a.nnz(), 0);
  for (double v : a.to_dense()) EXPECT_EQ(v, 0.0);
}

TEST(Triplets, OrderIndependent) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> idx(0, 9);
  std::uniform_real_distribution<double> val(-1, 1);
  std::vector<Triplet> t;
  for (int k = 0; k < 300; ++k) t.push_back({idx(rng), idx(rng), val(rng)});
  const SparseMatrix a = SparseMatrix::from_triplets(10, 10, t);
  std::shuffle(t.begin(), t.end(), rng);
  const SparseMatrix b = SparseMatrix::from_triplets(10, 10, t);
  EXPECT_EQ(a.row_offsets(), b.row_offsets());
  EXPECT_EQ(a.col_indices(), b.col_indices());
  EXPECT_EQ(a.values(), b.values());
}

TEST(Triplets, OutOfRange) {
  const std::vector<Triplet> t{{2, 0, 1.0}};
  EXPECT_THROW(SparseMatrix::from_triplets(2, 2, t), LinalgError);
}

TEST(Sparse, ProductsAgainstDense) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> val(-1, 1);
  std::vector<Triplet> ta, tb;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 5; ++j)
      if ((i + j) % 2 == 0) ta.push_back({i, j, val(rng)});
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) tb.push_back({i, j, val(rng)});
  const SparseMatrix a = SparseMatrix::from_triplets(4, 5, ta);
  const SparseMatrix b = SparseMatrix::from_triplets(5, 3, tb);
  const SparseMatrix c = multiply(a, b);
  const auto da = a.to_dense(), db = b.to_dense(), dc = c.to_dense();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 5; ++k) s += da[i * 5 + k] * db[k * 3 + j];
      EXPECT_NEAR(dc[i * 3 + j], s, 1e-14);
    }
  const std::vector<double> x{1, 2, 3, 4, 5}, y{1, -1, 2, 0.5};
  const auto ax = a.multiply(x);
  const auto aty = a.multiply_transpose(y);
  EXPECT_NEAR(dot(y, ax), dot(aty, x), 1e-13);
  EXPECT_NEAR(a.bilinear(y, x), dot(y, ax), 1e-13);
  const SparseMatrix at = a.transpose();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 5; ++j) EXPECT_EQ(at.coeff(j, i), a.coeff(i, j));
  const SparseMatrix s = add(a, a.scaled(2.0), -1.5);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(s.coeff(i, j), -2.0 * a.coeff(i, j), 1e-15);
}

TEST(Solve, Identity) {
  const std::vector<Triplet> t{{0, 0, 1}, {1, 1, 1}, {2, 2, 1}};
  const SparseMatrix a = SparseMatrix::from_triplets(3, 3, t);
  const std::vector<double> b{1.5, -2.0, 3.0};
  EXPECT_EQ(solve_direct(a, b), b);
}

TEST(Solve, IndefiniteTwoByTwo) {
  const std::vector<Triplet> t{{0, 1, 1}, {1, 0, 1}};
  const auto x = solve_direct(SparseMatrix::from_triplets(2, 2, t), std::vector<double>{1, 2});
  EXPECT_NEAR(x[0], 2.0, 1e-15);
  EXPECT_NEAR(x[1], 1.0, 1e-15);
}

TEST(Solve, RandomSpdAgainstDenseOracle) {
  std::mt19937_64 rng(11);
  const SparseMatrix a = random_spd(50, rng);
  std::normal_distribution<double> g;
  std::vector<double> b(50);
  for (double& v : b) v = g(rng);
  const auto x = solve_direct(a, b);
  EXPECT_LE(relative_residual(a, x, b), 1e-10);
  const auto oracle = dense_solve(a.to_dense(), b);
  for (int i = 0; i < 50; ++i) EXPECT_NEAR(x[i], oracle[i], 1e-10 * (1 + std::abs(oracle[i])));
}

TEST(Solve, TransposeSolve) {
  const std::vector<Triplet> t{{0, 0, 2}, {0, 1, 1}, {1, 1, 3}};
  const SparseMatrix a = SparseMatrix::from_triplets(2, 2, t);
  const LuFactorization lu(a);
  const auto x = lu.solve_transpose(std::vector<double>{2, 4});
  EXPECT_NEAR(x[0], 1.0, 1e-15);
  EXPECT_NEAR(x[1], 1.0, 1e-15);
}

TEST(Solve, SingularReportsPivot) {
  const std::vector<Triplet> t{{0, 0, 1}, {1, 0, 1}, {2, 2, 1}};
  const SparseMatrix a = SparseMatrix::from_triplets(3, 3, t);
  try {
    LuFactorization lu(a);
    FAIL() << "singular matrix factored";
  } catch (const SingularMatrixError& e) {
    EXPECT_GE(e.pivot(), 0);
  }
  EXPECT_THROW(solve_direct(a, std::vector<double>{1, 1, 1}), LinalgError);
}

TEST(Solve, StatsRecordCheckedSolves) {
  reset_solve_stats();
  const std::vector<Triplet> t{{0, 0, 4}, {1, 1, 2}};
  solve_direct(SparseMatrix::from_triplets(2, 2, t), std::vector<double>{1, 1});
  const SolveStats s = solve_stats();
  EXPECT_EQ(s.count, 1);
  EXPECT_LE(s.max_residual, 1e-15);
}

TEST(Blocks, SingleBlockFlattensToItself) {
  const std::vector<Triplet> t{{0, 0, 2}, {0, 1, -1}, {1, 0, -1}, {1, 1, 2}};
  const SparseMatrix a = SparseMatrix::from_triplets(2, 2, t);
  BlockSystem s;
  const int u = s.add_field("u", 2);
  s.add_block(u, u, a);
  s.rhs[u] = {1, 2};
  const FlatSystem f = flatten(s);
  EXPECT_EQ(f.matrix.to_dense(), a.to_dense());
  EXPECT_EQ(f.map.offsets, std::vector<int>{0});
  EXPECT_EQ(f.map.total, 2);
  EXPECT_EQ(f.rhs, (std::vector<double>{1, 2}));
}

TEST(Blocks, BorderGoesLast) {
  const std::vector<Triplet> t{{0, 0, 1}, {1, 1, 1}};
  BlockSystem s;
  const int a = s.add_field("a", 2);
  const int b = s.add_field("b", 1);
  s.add_block(a, a, SparseMatrix::from_triplets(2, 2, t));
  const std::vector<Triplet> tb{{0, 0, 1}};
  s.add_block(b, b, SparseMatrix::from_triplets(1, 1, tb));
  s.add_border(a, {1.0, 1.0});
  const FlatSystem f = flatten(s);
  EXPECT_EQ(f.map.total, 4);
  EXPECT_EQ(f.map.border_offset, 3);
  EXPECT_EQ(f.matrix.coeff(3, 0), 1.0);
  EXPECT_EQ(f.matrix.coeff(0, 3), 1.0);
  EXPECT_EQ(f.matrix.coeff(3, 2), 0.0);
  const auto parts = f.map.split(std::vector<double>{1, 2, 3, 4});
  ASSERT_EQ(parts.size(), 3u);
  EXPECT_EQ(parts[0], (std::vector<double>{1, 2}));
  EXPECT_EQ(parts[2], (std::vector<double>{4}));
  EXPECT_EQ(f.map.join(parts), (std::vector<double>{1, 2, 3, 4}));
}

TEST(Blocks, TransposePairIsSymmetric) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> val(-1, 1);
  std::vector<Triplet> t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) t.push_back({i, j, val(rng)});
  const SparseMatrix k = SparseMatrix::from_triplets(3, 4, t);
  BlockSystem s;
  const int e = s.add_field("E", 3);
  const int b = s.add_field("B", 4);
  s.add_block(e, b, k);
  s.add_block(b, e, k.transpose());
  const SparseMatrix m = flatten(s).matrix;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) EXPECT_EQ(m.coeff(i, j), m.coeff(j, i));
}

TEST(MatrixMarket, Header) {
  const std::vector<Triplet> t{{0, 1, 2.5}};
  std::ostringstream out;
  write_matrix_market(SparseMatrix::from_triplets(2, 2, t), out);
  const std::string s = out.str();
  EXPECT_EQ(s.rfind("%%MatrixMarket matrix coordinate real general", 0), 0u);
  EXPECT_NE(s.find("2 2 1"), std::string::npos);
  EXPECT_NE(s.find("1 2 2.5"), std::string::npos);
}
