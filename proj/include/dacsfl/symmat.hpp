// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "dacsfl/expr.hpp"
#include "dacsfl/sampling.hpp"

namespace dacsfl {

class SymMatrix {
 public:
  SymMatrix() = default;
  SymMatrix(int rows, int cols);

  static SymMatrix identity(int n);
  static SymMatrix column(const std::vector<Expr>& v);
  static SymMatrix from_columns(int rows, const std::vector<std::vector<Expr>>& cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Expr& operator()(int i, int j) { return data_[static_cast<std::size_t>(i * cols_ + j)]; }
  const Expr& operator()(int i, int j) const { return data_[static_cast<std::size_t>(i * cols_ + j)]; }

  std::vector<Expr> row(int i) const;
  std::vector<Expr> col(int j) const;
  SymMatrix block(int r0, int c0, int nr, int nc) const;
  SymMatrix transpose() const;
  SymMatrix simplified() const;
  SymMatrix substituted(const std::map<std::string, Expr>& values) const;
  Eigen::MatrixXd evaluate(const Point& p) const;
  bool is_structurally_zero() const;
  std::string str() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Expr> data_;
};

SymMatrix operator*(const SymMatrix& a, const SymMatrix& b);
SymMatrix operator+(const SymMatrix& a, const SymMatrix& b);
SymMatrix operator-(const SymMatrix& a, const SymMatrix& b);
SymMatrix operator*(const Expr& s, const SymMatrix& a);
std::vector<Expr> operator*(const SymMatrix& a, const std::vector<Expr>& v);
SymMatrix hstack(const SymMatrix& a, const SymMatrix& b);
SymMatrix vstack(const SymMatrix& a, const SymMatrix& b);
SymMatrix select_rows(const SymMatrix& a, const std::vector<int>& rows);
SymMatrix select_cols(const SymMatrix& a, const std::vector<int>& cols);

SymMatrix jacobian(const std::vector<Expr>& map, const std::vector<std::string>& vars);

// Rank of a numeric matrix by singular-value thresholding.
int numeric_rank(const Eigen::MatrixXd& a, double tol_rank, double floor);

struct RankInfo {
  int rank = 0;
  bool constant = true;
  std::vector<int> sample_ranks;
};

RankInfo numeric_rank(const SymMatrix& a, const Neighborhood& nb);

struct PivotPolicy {
  bool randomized = false;
  std::uint64_t seed = 0;
};

struct PivotCertificate {
  int row = 0;  // row of the input matrix
  int col = 0;
  Expr entry;
  double value = 0.0;  // entry evaluated at the center
};

// Q * input == reduced, reduced = [full-row-rank block; zero rows].
struct RowReduction {
  SymMatrix Q;
  SymMatrix reduced;
  int rank = 0;
  std::vector<PivotCertificate> pivots;  // one per nonzero row of reduced
  std::vector<int> zero_rows;            // input rows ending up as zero rows
  bool numeric_zero = false;             // some zero row certified only by sampling
};

RowReduction row_reduce(const SymMatrix& a, const Neighborhood& nb, const PivotPolicy& policy = {});

// Gauss-Jordan factorization of a full-row-rank matrix: inverse(rows) * A
// has an identity in the pivot columns.
struct GaussJordan {
  std::vector<int> pivot_cols;  // pivot column of each row
  std::vector<int> free_cols;
  SymMatrix normalized;         // T * A
  SymMatrix transform;          // T
};

GaussJordan gauss_jordan(const SymMatrix& a, const Neighborhood& nb, const PivotPolicy& policy = {});
SymMatrix kernel_basis(const SymMatrix& a, const Neighborhood& nb, const PivotPolicy& policy = {});
SymMatrix right_inverse(const SymMatrix& a, const Neighborhood& nb, const PivotPolicy& policy = {});
SymMatrix inverse(const SymMatrix& a, const Neighborhood& nb);

// Multiplies a column by the common denominator of its entries.
std::vector<Expr> clear_denominators(const std::vector<Expr>& v);

}  // namespace dacsfl
