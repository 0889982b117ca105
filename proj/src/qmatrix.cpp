// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#include "dacsfl/qmatrix.hpp"

#include <sstream>

namespace dacsfl {

QMatrix::QMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols), 0) {
  if (rows < 0 || cols < 0) throw Error(ErrorCode::Dimension, "negative matrix dimension");
}

QMatrix QMatrix::identity(int n) {
  QMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

QMatrix QMatrix::transpose() const {
  QMatrix t(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

QMatrix QMatrix::block(int r0, int c0, int nr, int nc) const {
  if (r0 < 0 || c0 < 0 || nr < 0 || nc < 0 || r0 + nr > rows_ || c0 + nc > cols_) {
    throw Error(ErrorCode::Dimension, "block out of range");
  }
  QMatrix b(nr, nc);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
  return b;
}

Eigen::MatrixXd QMatrix::to_double() const {
  Eigen::MatrixXd m(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).get_d();
  return m;
}

bool QMatrix::is_zero() const {
  for (const auto& v : data_)
    if (v != 0) return false;
  return true;
}

std::string QMatrix::str() const {
  std::ostringstream os;
  os << "[";
  for (int i = 0; i < rows_; ++i) {
    if (i) os << "; ";
    for (int j = 0; j < cols_; ++j) os << (j ? ", " : "") << (*this)(i, j).get_str();
  }
  os << "]";
  return os.str();
}

QMatrix operator*(const QMatrix& a, const QMatrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::Dimension, "matrix product dimension mismatch");
  QMatrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      if (a(i, k) == 0) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += a(i, k) * b(k, j);
    }
  return c;
}

QMatrix operator+(const QMatrix& a, const QMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorCode::Dimension, "matrix sum dimension mismatch");
  QMatrix c(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) + b(i, j);
  return c;
}

QMatrix operator-(const QMatrix& a, const QMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorCode::Dimension, "matrix sum dimension mismatch");
  QMatrix c(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) - b(i, j);
  return c;
}

QMatrix hstack(const QMatrix& a, const QMatrix& b) {
  if (a.rows() != b.rows()) throw Error(ErrorCode::Dimension, "hstack row mismatch");
  QMatrix c(a.rows(), a.cols() + b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) c(i, j) = a(i, j);
    for (int j = 0; j < b.cols(); ++j) c(i, a.cols() + j) = b(i, j);
  }
  return c;
}

QMatrix vstack(const QMatrix& a, const QMatrix& b) {
  if (a.cols() != b.cols()) throw Error(ErrorCode::Dimension, "vstack column mismatch");
  QMatrix c(a.rows() + b.rows(), a.cols());
  for (int j = 0; j < a.cols(); ++j) {
    for (int i = 0; i < a.rows(); ++i) c(i, j) = a(i, j);
    for (int i = 0; i < b.rows(); ++i) c(a.rows() + i, j) = b(i, j);
  }
  return c;
}

QMatrix rref(const QMatrix& a, std::vector<int>* pivots) {
  QMatrix m = a;
  std::vector<int> piv;
  int r = 0;
  for (int c = 0; c < m.cols() && r < m.rows(); ++c) {
    int p = -1;
    for (int i = r; i < m.rows(); ++i)
      if (m(i, c) != 0) {
        p = i;
        break;
      }
    if (p < 0) continue;
    for (int j = 0; j < m.cols(); ++j) std::swap(m(p, j), m(r, j));
    Rational inv = 1 / m(r, c);
    for (int j = 0; j < m.cols(); ++j) m(r, j) *= inv;
    for (int i = 0; i < m.rows(); ++i) {
      if (i == r || m(i, c) == 0) continue;
      Rational f = m(i, c);
      for (int j = 0; j < m.cols(); ++j) m(i, j) -= f * m(r, j);
    }
    piv.push_back(c);
    ++r;
  }
  if (pivots) *pivots = piv;
  return m;
}

int rank(const QMatrix& a) {
  std::vector<int> piv;
  rref(a, &piv);
  return static_cast<int>(piv.size());
}

QMatrix null_space(const QMatrix& a) {
  std::vector<int> piv;
  QMatrix r = rref(a, &piv);
  std::vector<bool> is_pivot(static_cast<std::size_t>(a.cols()), false);
  for (int p : piv) is_pivot[static_cast<std::size_t>(p)] = true;
  std::vector<int> free;
  for (int j = 0; j < a.cols(); ++j)
    if (!is_pivot[static_cast<std::size_t>(j)]) free.push_back(j);
  QMatrix k(a.cols(), static_cast<int>(free.size()));
  for (std::size_t f = 0; f < free.size(); ++f) {
    k(free[f], static_cast<int>(f)) = 1;
    for (std::size_t i = 0; i < piv.size(); ++i) k(piv[i], static_cast<int>(f)) = -r(static_cast<int>(i), free[f]);
  }
  return k;
}

QMatrix column_basis(const QMatrix& a) {
  std::vector<int> piv;
  rref(a, &piv);
  QMatrix b(a.rows(), static_cast<int>(piv.size()));
  for (std::size_t j = 0; j < piv.size(); ++j)
    for (int i = 0; i < a.rows(); ++i) b(i, static_cast<int>(j)) = a(i, piv[j]);
  return b;
}

QMatrix subspace_sum(const QMatrix& v, const QMatrix& w) { return column_basis(hstack(v, w)); }

QMatrix subspace_intersection(const QMatrix& v, const QMatrix& w) {
  QMatrix neg_w(w.rows(), w.cols());
  for (int i = 0; i < w.rows(); ++i)
    for (int j = 0; j < w.cols(); ++j) neg_w(i, j) = -w(i, j);
  QMatrix k = null_space(hstack(v, neg_w));
  return column_basis(v * k.block(0, 0, v.cols(), k.cols()));
}

QMatrix preimage(const QMatrix& a, const QMatrix& s) {
  QMatrix neg_s(s.rows(), s.cols());
  for (int i = 0; i < s.rows(); ++i)
    for (int j = 0; j < s.cols(); ++j) neg_s(i, j) = -s(i, j);
  QMatrix k = null_space(hstack(a, neg_s));
  return column_basis(k.block(0, 0, a.cols(), k.cols()));
}

QMatrix image(const QMatrix& a, const QMatrix& v) { return column_basis(a * v); }

bool subspace_contains(const QMatrix& big, const QMatrix& small) {
  return rank(hstack(big, small)) == rank(big);
}

}  // namespace dacsfl
