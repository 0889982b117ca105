// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#include "dacsfl/linear.hpp"

#include <Eigen/Eigenvalues>

#include <complex>
#include <numeric>
#include <random>
#include <sstream>

namespace dacsfl {

namespace {

std::string multi_index(const std::vector<int>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + ")";
}

int complex_rank(const Eigen::MatrixXcd& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
  const auto& s = svd.singularValues();
  double tol = 1e-9 * std::max(1.0, s(0));
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol) ++r;
  return r;
}

Eigen::MatrixXcd pencil(const Eigen::MatrixXd& e, const Eigen::MatrixXd& h, const Eigen::MatrixXd& l,
                        std::complex<double> lambda) {
  Eigen::MatrixXcd m(e.rows(), e.cols() + l.cols());
  m.leftCols(e.cols()) = lambda * e.cast<std::complex<double>>() - h.cast<std::complex<double>>();
  m.rightCols(l.cols()) = l.cast<std::complex<double>>();
  return m;
}

// Calls visit for every k-subset of {0..n-1} until it returns false.
template <typename F>
void for_each_subset(int n, int k, F&& visit) {
  if (k > n || k < 0) return;
  std::vector<int> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    if (!visit(idx)) return;
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace

int ChainIndices::size() const {
  return std::accumulate(rho.begin(), rho.end(), 0) + std::accumulate(rho_bar.begin(), rho_bar.end(), 0);
}

std::string ChainIndices::str() const { return "rho=" + multi_index(rho) + ", rho_bar=" + multi_index(rho_bar); }

LinearDacs canonical_target(const ChainIndices& idx) {
  const int s = static_cast<int>(idx.rho_bar.size());
  return canonical_target(idx, static_cast<int>(idx.rho.size()), idx.size() - s);
}

LinearDacs canonical_target(const ChainIndices& idx, int m, int l) {
  const int mu = static_cast<int>(idx.rho.size());
  const int s = static_cast<int>(idx.rho_bar.size());
  const int n = idx.size();
  const int r = n - s;
  if (m < mu || l < r + (m - mu)) throw Error(ErrorCode::Dimension, "target dimensions too small for the indices");
  for (int k : idx.rho)
    if (k < 1) throw Error(ErrorCode::Argument, "chain lengths must be positive");
  for (int k : idx.rho_bar)
    if (k < 1) throw Error(ErrorCode::Argument, "chain lengths must be positive");
  LinearDacs ld{QMatrix(l, n), QMatrix(l, n), QMatrix(l, m)};
  int row = 0, col = 0;
  for (int j = 0; j < mu; ++j) {
    const int len = idx.rho[static_cast<std::size_t>(j)];
    for (int i = 0; i < len; ++i) {
      ld.E(row + i, col + i) = 1;
      if (i + 1 < len) ld.H(row + i, col + i + 1) = 1;
    }
    ld.L(row + len - 1, j) = 1;
    row += len;
    col += len;
  }
  for (int k : idx.rho_bar) {
    for (int i = 0; i + 1 < k; ++i) {
      ld.E(row + i, col + i) = 1;
      ld.H(row + i, col + i + 1) = 1;
    }
    row += k - 1;
    col += k;
  }
  for (int j = mu; j < m; ++j) ld.L(row++, j) = 1;
  return ld;
}

std::vector<std::string> canonical_states(const ChainIndices& idx) {
  std::vector<std::string> out;
  int nu = std::accumulate(idx.rho.begin(), idx.rho.end(), 0);
  int nv = std::accumulate(idx.rho_bar.begin(), idx.rho_bar.end(), 0);
  for (int i = 1; i <= nu; ++i) out.push_back("xi" + std::to_string(i));
  for (int i = 1; i <= nv; ++i) out.push_back("z" + std::to_string(i));
  return out;
}

std::vector<std::string> canonical_inputs(const ChainIndices& idx, int m) {
  std::vector<std::string> out;
  const int mu = static_cast<int>(idx.rho.size());
  for (int j = 1; j <= mu; ++j) out.push_back("ut" + std::to_string(j));
  for (int j = 1; j <= m - mu; ++j) out.push_back("wp" + std::to_string(j));
  return out;
}

WongSequences wong_sequences(const LinearDacs& ld) {
  const int n = ld.n();
  WongSequences w;
  w.V.push_back(QMatrix::identity(n));
  w.W.push_back(QMatrix(n, 0));
  w.W_hat.push_back(null_space(ld.E));
  for (int i = 0; i <= n + 1; ++i) {
    const QMatrix& v = w.V.back();
    const QMatrix& x = w.W.back();
    const QMatrix& xh = w.W_hat.back();
    QMatrix v_next = preimage(ld.H, hstack(ld.E * v, ld.L));
    QMatrix w_next = preimage(ld.E, hstack(ld.H * x, ld.L));
    QMatrix wh_next = preimage(ld.E, hstack(ld.H * xh, ld.L));
    bool stable = rank(v_next) == rank(v) && rank(w_next) == rank(x) && rank(wh_next) == rank(xh);
    w.V.push_back(v_next);
    w.W.push_back(w_next);
    w.W_hat.push_back(wh_next);
    if (stable) break;
  }
  w.V_star = w.V.back();
  w.W_star = w.W.back();
  return w;
}

ControllabilityReport is_completely_controllable(const LinearDacs& ld, std::uint64_t seed) {
  ControllabilityReport rep;
  const int n = ld.n();
  WongSequences w = wong_sequences(ld);
  rep.dim_intersection = rank(subspace_intersection(w.V_star, w.W_star));
  rep.controllable = rep.dim_intersection == n;

  const int full = rank(hstack(hstack(ld.E, ld.H), ld.L));
  rep.image_condition = full == rank(hstack(ld.E, ld.L));
  Eigen::MatrixXd e = ld.E.to_double(), h = ld.H.to_double(), l = ld.L.to_double();
  std::vector<std::complex<double>> lambdas;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pick(-3.0, 3.0);
  for (int k = 0; k < 8; ++k) lambdas.emplace_back(pick(rng), 0.0);
  int generic = 0;
  for (const auto& lam : lambdas) generic = std::max(generic, complex_rank(pencil(e, h, l, lam)));
  // Rank drops of [lE - H, L] are roots of every maximal minor, so the
  // eigenvalues of the regular square subpencils contain them all.
  const int cols = n + ld.m();
  int visited = 0;
  std::complex<double> probe(pick(rng), 0.0);
  for_each_subset(ld.l(), generic, [&](const std::vector<int>& rows) {
    for_each_subset(cols, generic, [&](const std::vector<int>& cs) {
      Eigen::MatrixXd a(generic, generic), b(generic, generic);
      for (int i = 0; i < generic; ++i)
        for (int j = 0; j < generic; ++j) {
          int r = rows[static_cast<std::size_t>(i)], c = cs[static_cast<std::size_t>(j)];
          a(i, j) = c < n ? e(r, c) : 0.0;
          b(i, j) = c < n ? h(r, c) : -l(r, c - n);
        }
      Eigen::MatrixXcd at = probe * a.cast<std::complex<double>>() - b.cast<std::complex<double>>();
      if (complex_rank(at) < generic) return true;
      Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges(b, a);
      for (Eigen::Index k = 0; k < ges.betas().size(); ++k) {
        if (std::abs(ges.betas()(k)) < 1e-12) continue;
        lambdas.push_back(ges.alphas()(k) / ges.betas()(k));
      }
      return ++visited < 256;
    });
    return visited < 256;
  });
  rep.pencil_condition = true;
  for (const auto& lam : lambdas) {
    if (complex_rank(pencil(e, h, l, lam)) != full) {
      rep.pencil_condition = false;
      std::ostringstream os;
      os << "rank [lE - H, L] drops at l = " << lam.real() << (lam.imag() >= 0 ? "+" : "") << lam.imag() << "i";
      rep.evidence = os.str();
      break;
    }
  }
  rep.pencil_points = static_cast<int>(lambdas.size());
  rep.rank_criterion = rep.image_condition && rep.pencil_condition;
  if (rep.evidence.empty()) {
    std::ostringstream os;
    os << "dim(V* cap W*) = " << rep.dim_intersection << " of " << n
       << (rep.image_condition ? "" : "; Im H not contained in Im E + Im L");
    rep.evidence = os.str();
  }
  return rep;
}

}  // namespace dacsfl
