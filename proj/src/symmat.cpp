// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#include "dacsfl/symmat.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <tuple>

namespace dacsfl {

SymMatrix::SymMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols)) {
  if (rows < 0 || cols < 0) throw Error(ErrorCode::Dimension, "negative matrix dimension");
}

SymMatrix SymMatrix::identity(int n) {
  SymMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = Expr(1);
  return m;
}

SymMatrix SymMatrix::column(const std::vector<Expr>& v) {
  SymMatrix m(static_cast<int>(v.size()), 1);
  for (int i = 0; i < m.rows(); ++i) m(i, 0) = v[static_cast<std::size_t>(i)];
  return m;
}

SymMatrix SymMatrix::from_columns(int rows, const std::vector<std::vector<Expr>>& cols) {
  SymMatrix m(rows, static_cast<int>(cols.size()));
  for (int j = 0; j < m.cols(); ++j) {
    const auto& c = cols[static_cast<std::size_t>(j)];
    if (static_cast<int>(c.size()) != rows) throw Error(ErrorCode::Dimension, "column length mismatch");
    for (int i = 0; i < rows; ++i) m(i, j) = c[static_cast<std::size_t>(i)];
  }
  return m;
}

std::vector<Expr> SymMatrix::row(int i) const {
  std::vector<Expr> r;
  for (int j = 0; j < cols_; ++j) r.push_back((*this)(i, j));
  return r;
}

std::vector<Expr> SymMatrix::col(int j) const {
  std::vector<Expr> c;
  for (int i = 0; i < rows_; ++i) c.push_back((*this)(i, j));
  return c;
}

SymMatrix SymMatrix::block(int r0, int c0, int nr, int nc) const {
  if (r0 < 0 || c0 < 0 || nr < 0 || nc < 0 || r0 + nr > rows_ || c0 + nc > cols_) {
    throw Error(ErrorCode::Dimension, "block out of range");
  }
  SymMatrix b(nr, nc);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
  return b;
}

SymMatrix SymMatrix::transpose() const {
  SymMatrix t(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

SymMatrix SymMatrix::simplified() const {
  SymMatrix s = *this;
  for (auto& e : s.data_) e = simplify(e);
  return s;
}

SymMatrix SymMatrix::substituted(const std::map<std::string, Expr>& values) const {
  SymMatrix s = *this;
  for (auto& e : s.data_) e = substitute(e, values);
  return s;
}

Eigen::MatrixXd SymMatrix::evaluate(const Point& p) const {
  Eigen::MatrixXd m(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) m(i, j) = dacsfl::evaluate((*this)(i, j), p);
  return m;
}

bool SymMatrix::is_structurally_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](const Expr& e) { return simplify(e).is_zero(); });
}

std::string SymMatrix::str() const {
  std::ostringstream os;
  os << "[";
  for (int i = 0; i < rows_; ++i) {
    if (i) os << "; ";
    for (int j = 0; j < cols_; ++j) os << (j ? ", " : "") << (*this)(i, j).str();
  }
  os << "]";
  return os.str();
}

SymMatrix operator*(const SymMatrix& a, const SymMatrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::Dimension, "matrix product dimension mismatch");
  SymMatrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) {
      std::vector<Expr> terms;
      for (int k = 0; k < a.cols(); ++k) {
        if (a(i, k).is_zero() || b(k, j).is_zero()) continue;
        terms.push_back(a(i, k) * b(k, j));
      }
      c(i, j) = simplify(Expr::sum(terms));
    }
  return c;
}

static SymMatrix combine(const SymMatrix& a, const SymMatrix& b, int sign) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorCode::Dimension, "matrix sum dimension mismatch");
  SymMatrix c(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) c(i, j) = simplify(sign > 0 ? a(i, j) + b(i, j) : a(i, j) - b(i, j));
  return c;
}

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) { return combine(a, b, 1); }
SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) { return combine(a, b, -1); }

SymMatrix operator*(const Expr& s, const SymMatrix& a) {
  SymMatrix c(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) c(i, j) = simplify(s * a(i, j));
  return c;
}

std::vector<Expr> operator*(const SymMatrix& a, const std::vector<Expr>& v) {
  return (a * SymMatrix::column(v)).col(0);
}

SymMatrix hstack(const SymMatrix& a, const SymMatrix& b) {
  if (a.rows() != b.rows()) throw Error(ErrorCode::Dimension, "hstack row mismatch");
  SymMatrix c(a.rows(), a.cols() + b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) c(i, j) = a(i, j);
    for (int j = 0; j < b.cols(); ++j) c(i, a.cols() + j) = b(i, j);
  }
  return c;
}

SymMatrix vstack(const SymMatrix& a, const SymMatrix& b) {
  if (a.cols() != b.cols()) throw Error(ErrorCode::Dimension, "vstack column mismatch");
  SymMatrix c(a.rows() + b.rows(), a.cols());
  for (int j = 0; j < a.cols(); ++j) {
    for (int i = 0; i < a.rows(); ++i) c(i, j) = a(i, j);
    for (int i = 0; i < b.rows(); ++i) c(a.rows() + i, j) = b(i, j);
  }
  return c;
}

SymMatrix select_rows(const SymMatrix& a, const std::vector<int>& rows) {
  SymMatrix c(static_cast<int>(rows.size()), a.cols());
  for (int i = 0; i < c.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) c(i, j) = a(rows[static_cast<std::size_t>(i)], j);
  return c;
}

SymMatrix select_cols(const SymMatrix& a, const std::vector<int>& cols) {
  return select_rows(a.transpose(), cols).transpose();
}

SymMatrix jacobian(const std::vector<Expr>& map, const std::vector<std::string>& vars) {
  SymMatrix j(static_cast<int>(map.size()), static_cast<int>(vars.size()));
  for (int i = 0; i < j.rows(); ++i)
    for (int k = 0; k < j.cols(); ++k)
      j(i, k) = differentiate(map[static_cast<std::size_t>(i)], vars[static_cast<std::size_t>(k)]);
  return j;
}

int numeric_rank(const Eigen::MatrixXd& a, double tol_rank, double floor) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  double cut = std::max(tol_rank * s(0), floor);
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) ++r;
  return r;
}

RankInfo numeric_rank(const SymMatrix& a, const Neighborhood& nb) {
  RankInfo info;
  if (a.rows() == 0 || a.cols() == 0) return info;
  const Settings& st = nb.settings();
  std::vector<Compiled> entries;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) entries.emplace_back(simplify(a(i, j)), nb.slots());
  auto eval = [&](const Point& p, Eigen::MatrixXd& m) {
    std::vector<double> v = nb.slot_values(p);
    m.resize(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j < a.cols(); ++j) {
        double x = entries[static_cast<std::size_t>(i * a.cols() + j)](v.data());
        if (!std::isfinite(x)) return false;
        m(i, j) = x;
      }
    return true;
  };
  Eigen::MatrixXd m;
  if (!eval(nb.center(), m)) throw Error(ErrorCode::Numerical, "matrix is singular at the working point");
  info.rank = numeric_rank(m, st.tol_rank, st.tol_zero);
  int n = std::min<int>(st.rank_samples, static_cast<int>(nb.samples().size()));
  for (int s = 0; s < n; ++s) {
    if (!eval(nb.samples()[static_cast<std::size_t>(s)], m)) continue;
    int r = numeric_rank(m, st.tol_rank, st.tol_zero);
    info.sample_ranks.push_back(r);
    if (r != info.rank) info.constant = false;
  }
  return info;
}

namespace {

struct Candidate {
  int row = -1;
  int col = -1;
  double value = 0.0;
};

// Prefers constant entries, then low Markowitz cost, then magnitude at the
// center, then the rightmost column and the topmost row.
Candidate select_pivot(const SymMatrix& m, const std::vector<bool>& row_used, const std::vector<bool>& col_used,
                       const Neighborhood& nb, std::mt19937_64* rng) {
  const double tol = nb.settings().tol_nonzero;
  std::vector<int> row_count(static_cast<std::size_t>(m.rows()), 0);
  std::vector<int> col_count(static_cast<std::size_t>(m.cols()), 0);
  for (int i = 0; i < m.rows(); ++i) {
    if (row_used[static_cast<std::size_t>(i)]) continue;
    for (int j = 0; j < m.cols(); ++j) {
      if (col_used[static_cast<std::size_t>(j)] || m(i, j).is_zero()) continue;
      ++row_count[static_cast<std::size_t>(i)];
      ++col_count[static_cast<std::size_t>(j)];
    }
  }
  std::vector<Candidate> cands;
  std::vector<std::tuple<int, long, double, int, int>> keys;
  for (int i = 0; i < m.rows(); ++i) {
    if (row_used[static_cast<std::size_t>(i)]) continue;
    for (int j = 0; j < m.cols(); ++j) {
      if (col_used[static_cast<std::size_t>(j)] || m(i, j).is_zero()) continue;
      double v = evaluate(m(i, j), nb.center());
      if (!std::isfinite(v) || std::fabs(v) <= tol) continue;
      cands.push_back({i, j, v});
      long markowitz = static_cast<long>(row_count[static_cast<std::size_t>(i)] - 1) *
                       static_cast<long>(col_count[static_cast<std::size_t>(j)] - 1);
      keys.emplace_back(m(i, j).is_number() ? 0 : 1, markowitz, -std::fabs(v), -j, i);
    }
  }
  if (cands.empty()) return {};
  if (rng) {
    std::uniform_int_distribution<std::size_t> pick(0, cands.size() - 1);
    return cands[pick(*rng)];
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < cands.size(); ++k)
    if (keys[k] < keys[best]) best = k;
  return cands[best];
}

void eliminate(SymMatrix& m, SymMatrix& q, int pivot_row, int col, int target) {
  Expr factor = simplify(m(target, col) / m(pivot_row, col));
  for (int c = 0; c < m.cols(); ++c) {
    if (m(pivot_row, c).is_zero()) continue;
    m(target, c) = simplify(m(target, c) - factor * m(pivot_row, c));
  }
  m(target, col) = Expr(0);
  for (int c = 0; c < q.cols(); ++c) {
    if (q(pivot_row, c).is_zero()) continue;
    q(target, c) = simplify(q(target, c) - factor * q(pivot_row, c));
  }
}

std::string entry_label(int i, int j, const Expr& e) {
  return "entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ") = " + e.str();
}

}  // namespace

RowReduction row_reduce(const SymMatrix& a, const Neighborhood& nb, const PivotPolicy& policy) {
  SymMatrix m = a.simplified();
  SymMatrix q = SymMatrix::identity(a.rows());
  std::vector<bool> row_used(static_cast<std::size_t>(a.rows()), false);
  std::vector<bool> col_used(static_cast<std::size_t>(a.cols()), false);
  std::mt19937_64 rng(policy.seed);
  std::vector<PivotCertificate> found;
  while (true) {
    Candidate c = select_pivot(m, row_used, col_used, nb, policy.randomized ? &rng : nullptr);
    if (c.row < 0) break;
    row_used[static_cast<std::size_t>(c.row)] = true;
    col_used[static_cast<std::size_t>(c.col)] = true;
    found.push_back({c.row, c.col, m(c.row, c.col), c.value});
    for (int r = 0; r < m.rows(); ++r) {
      if (row_used[static_cast<std::size_t>(r)] || m(r, c.col).is_zero()) continue;
      eliminate(m, q, c.row, c.col, r);
    }
  }
  RowReduction out;
  for (int r = 0; r < m.rows(); ++r) {
    if (row_used[static_cast<std::size_t>(r)]) continue;
    for (int j = 0; j < m.cols(); ++j) {
      if (m(r, j).is_zero()) continue;
      ZeroTest z = is_zero(m(r, j), nb);
      if (z.state == ZeroTest::State::NonzeroAt) {
        throw Error(ErrorCode::Certification,
                    "rank is not constant near the point: " + entry_label(r, j, m(r, j)) + " vanishes at the point only");
      }
      if (z.state == ZeroTest::State::Unknown) {
        throw Error(ErrorCode::Certification, "cannot certify rank near point: " + entry_label(r, j, m(r, j)));
      }
      if (z.numeric) out.numeric_zero = true;
      m(r, j) = Expr(0);
    }
    out.zero_rows.push_back(r);
  }
  std::vector<int> order;
  std::sort(found.begin(), found.end(), [](const auto& x, const auto& y) { return x.row < y.row; });
  for (const auto& p : found) order.push_back(p.row);
  order.insert(order.end(), out.zero_rows.begin(), out.zero_rows.end());
  out.Q = select_rows(q, order);
  out.reduced = select_rows(m, order);
  out.rank = static_cast<int>(found.size());
  out.pivots = found;
  return out;
}

GaussJordan gauss_jordan(const SymMatrix& a, const Neighborhood& nb, const PivotPolicy& policy) {
  SymMatrix m = a.simplified();
  SymMatrix t = SymMatrix::identity(a.rows());
  std::vector<bool> row_used(static_cast<std::size_t>(a.rows()), false);
  std::vector<bool> col_used(static_cast<std::size_t>(a.cols()), false);
  std::mt19937_64 rng(policy.seed);
  GaussJordan out;
  out.pivot_cols.assign(static_cast<std::size_t>(a.rows()), -1);
  for (int step = 0; step < a.rows(); ++step) {
    Candidate c = select_pivot(m, row_used, col_used, nb, policy.randomized ? &rng : nullptr);
    if (c.row < 0) throw Error(ErrorCode::Certification, "matrix does not have full row rank at the point");
    row_used[static_cast<std::size_t>(c.row)] = true;
    col_used[static_cast<std::size_t>(c.col)] = true;
    out.pivot_cols[static_cast<std::size_t>(c.row)] = c.col;
    Expr p = m(c.row, c.col);
    for (int j = 0; j < m.cols(); ++j) m(c.row, j) = simplify(m(c.row, j) / p);
    for (int j = 0; j < t.cols(); ++j) t(c.row, j) = simplify(t(c.row, j) / p);
    for (int r = 0; r < m.rows(); ++r) {
      if (r == c.row || m(r, c.col).is_zero()) continue;
      eliminate(m, t, c.row, c.col, r);
    }
  }
  for (int j = 0; j < a.cols(); ++j)
    if (!col_used[static_cast<std::size_t>(j)]) out.free_cols.push_back(j);
  out.normalized = m;
  out.transform = t;
  return out;
}

std::vector<Expr> clear_denominators(const std::vector<Expr>& v) {
  std::vector<Expr> out;
  for (const auto& e : v) out.push_back(simplify(e));
  for (std::size_t guard = 0; guard < 4 * v.size() + 4; ++guard) {
    bool changed = false;
    for (const auto& e : out) {
      Expr den = numer_denom(e).second;
      if (den.is_number()) continue;
      for (auto& x : out) x = simplify(x * den);
      changed = true;
      break;
    }
    if (!changed) break;
  }
  return out;
}

SymMatrix kernel_basis(const SymMatrix& a, const Neighborhood& nb, const PivotPolicy& policy) {
  GaussJordan gj = gauss_jordan(a, nb, policy);
  std::vector<std::vector<Expr>> cols;
  for (int f : gj.free_cols) {
    std::vector<Expr> v(static_cast<std::size_t>(a.cols()), Expr(0));
    v[static_cast<std::size_t>(f)] = Expr(1);
    for (int i = 0; i < a.rows(); ++i) {
      v[static_cast<std::size_t>(gj.pivot_cols[static_cast<std::size_t>(i)])] = simplify(-gj.normalized(i, f));
    }
    cols.push_back(clear_denominators(v));
  }
  SymMatrix k = SymMatrix::from_columns(a.cols(), cols);
  SymMatrix check = a * k;
  for (int i = 0; i < check.rows(); ++i)
    for (int j = 0; j < check.cols(); ++j) {
      if (check(i, j).is_zero()) continue;
      if (is_zero(check(i, j), nb).state != ZeroTest::State::Zero) {
        throw Error(ErrorCode::Certification, "kernel basis verification failed: " + entry_label(i, j, check(i, j)));
      }
    }
  return k;
}

SymMatrix right_inverse(const SymMatrix& a, const Neighborhood& nb, const PivotPolicy& policy) {
  GaussJordan gj = gauss_jordan(a, nb, policy);
  SymMatrix r(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.rows(); ++j) r(gj.pivot_cols[static_cast<std::size_t>(i)], j) = gj.transform(i, j);
  SymMatrix residual = a * r - SymMatrix::identity(a.rows());
  for (int i = 0; i < residual.rows(); ++i)
    for (int j = 0; j < residual.cols(); ++j) {
      if (residual(i, j).is_zero()) continue;
      if (is_zero(residual(i, j), nb).state != ZeroTest::State::Zero) {
        throw Error(ErrorCode::Certification, "right inverse verification failed: " + entry_label(i, j, residual(i, j)));
      }
    }
  return r;
}

SymMatrix inverse(const SymMatrix& a, const Neighborhood& nb) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::Dimension, "inverse of a non-square matrix");
  return right_inverse(a, nb);
}

}  // namespace dacsfl
