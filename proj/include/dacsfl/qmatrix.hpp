// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "dacsfl/expr.hpp"

namespace dacsfl {

// Dense matrix with exact rational entries.
class QMatrix {
 public:
  QMatrix() = default;
  QMatrix(int rows, int cols);

  static QMatrix identity(int n);
  static QMatrix zero(int rows, int cols) { return QMatrix(rows, cols); }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Rational& operator()(int i, int j) { return data_[static_cast<std::size_t>(i * cols_ + j)]; }
  const Rational& operator()(int i, int j) const { return data_[static_cast<std::size_t>(i * cols_ + j)]; }

  QMatrix transpose() const;
  QMatrix block(int r0, int c0, int nr, int nc) const;
  QMatrix col(int j) const { return block(0, j, rows_, 1); }
  Eigen::MatrixXd to_double() const;
  bool is_zero() const;
  std::string str() const;

  friend bool operator==(const QMatrix& a, const QMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Rational> data_;
};

QMatrix operator*(const QMatrix& a, const QMatrix& b);
QMatrix operator+(const QMatrix& a, const QMatrix& b);
QMatrix operator-(const QMatrix& a, const QMatrix& b);
QMatrix hstack(const QMatrix& a, const QMatrix& b);
QMatrix vstack(const QMatrix& a, const QMatrix& b);

// Reduced row echelon form; pivot columns are returned through `pivots`.
QMatrix rref(const QMatrix& a, std::vector<int>* pivots = nullptr);
int rank(const QMatrix& a);

// Subspaces are represented by matrices whose columns form a basis.
QMatrix null_space(const QMatrix& a);
QMatrix column_basis(const QMatrix& a);
QMatrix subspace_sum(const QMatrix& v, const QMatrix& w);
QMatrix subspace_intersection(const QMatrix& v, const QMatrix& w);
// {x : a x in span(s)}
QMatrix preimage(const QMatrix& a, const QMatrix& s);
// {a x : x in span(v)}
QMatrix image(const QMatrix& a, const QMatrix& v);
bool subspace_contains(const QMatrix& big, const QMatrix& small);

}  // namespace dacsfl
