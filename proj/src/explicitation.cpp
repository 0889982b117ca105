// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#include "dacsfl/explicitation.hpp"

#include <algorithm>
#include <charconv>
#include <random>
#include <sstream>

#include "dacsfl/textfile.hpp"

namespace dacsfl {

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_rows(std::ostringstream& os, const SymMatrix& m) {
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) os << (j ? ", " : "") << m(i, j).str();
    os << "\n";
  }
}

void write_names(std::ostringstream& os, const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < names.size(); ++i) os << (i ? " " : "") << names[i];
  os << "\n";
}

// Random constant matrix L * U with unit triangular factors (determinant 1).
QMatrix random_unimodular(int n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(-2, 2);
  QMatrix lo = QMatrix::identity(n), up = QMatrix::identity(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) {
      lo(i, j) = pick(rng);
      up(j, i) = pick(rng);
    }
  return lo * up;
}

SymMatrix to_sym(const QMatrix& q) {
  SymMatrix m(q.rows(), q.cols());
  for (int i = 0; i < q.rows(); ++i)
    for (int j = 0; j < q.cols(); ++j) m(i, j) = Expr(q(i, j));
  return m;
}

void require_pass(const RelationCheck& rc) {
  if (rc.verdict != Verdict::Pass) {
    throw Error(ErrorCode::Certification, "explicitation identity " + rc.name + " not certified: " + rc.detail);
  }
}

void require_invertible(const SymMatrix& m, const Point& p, const std::string& what, const Settings& st) {
  if (m.rows() == 0) return;
  Eigen::MatrixXd v = m.evaluate(p);
  if (!v.allFinite() || numeric_rank(v, st.tol_rank, st.tol_zero) < m.rows()) {
    throw Error(ErrorCode::Certification, what + " is not invertible at the working point");
  }
}

void require_provenance(const Explicitation& e) {
  if (!e.has_provenance) throw Error(ErrorCode::Argument, "explicitation '" + e.name + "' has no provenance witness");
}

// Left inverse of a full-column-rank matrix.
SymMatrix left_inverse(const SymMatrix& a, const Neighborhood& nb) {
  if (a.cols() == 0) return SymMatrix(0, a.rows());
  return right_inverse(a.transpose(), nb).transpose();
}

std::map<std::string, Expr> composition(const Explicitation& b, const std::vector<Expr>& psi) {
  std::map<std::string, Expr> m = b.param_values();
  for (int i = 0; i < b.n(); ++i) m[b.states[static_cast<std::size_t>(i)]] = psi[static_cast<std::size_t>(i)];
  return m;
}

void check_dims(const Explicitation& a, const Explicitation& b) {
  if (a.n() != b.n() || a.m() != b.m() || a.s() != b.s() || a.p() != b.p()) {
    throw Error(ErrorCode::Dimension, "explicitations have different (n, m, s, p)");
  }
}

}  // namespace

std::map<std::string, Expr> Explicitation::param_values() const {
  std::map<std::string, Expr> m;
  for (const auto& [k, v] : params) m[k] = Expr(v);
  return m;
}

Neighborhood neighborhood(const Explicitation& e, const Settings& settings, std::uint64_t salt) {
  return Neighborhood(e.point, e.states, settings, salt);
}

Explicitation explicitate(const Dacs& d, const Settings& settings, const ExplicitationOptions& options) {
  Neighborhood nb = neighborhood(d, settings, 0xE1);
  RankInfo ri = numeric_rank(d.E, nb);
  if (!ri.constant) throw Error(ErrorCode::Certification, "rank of E is not constant near the working point");
  RowReduction rr = row_reduce(d.E, nb, options.pivots);
  const int r = rr.rank;
  const int l = d.l();
  SymMatrix q = rr.Q;
  std::mt19937_64 rng(options.seed * 0x9E3779B97F4A7C15ULL + 0xE1);
  if (options.randomize) {
    QMatrix t = QMatrix::identity(l);
    QMatrix t1 = random_unimodular(r, rng), t4 = random_unimodular(l - r, rng);
    std::uniform_int_distribution<int> pick(-2, 2);
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < r; ++j) t(i, j) = t1(i, j);
      for (int j = r; j < l; ++j) t(i, j) = pick(rng);
    }
    for (int i = r; i < l; ++i)
      for (int j = r; j < l; ++j) t(i, j) = t4(i - r, j - r);
    q = to_sym(t) * q;
  }
  SymMatrix qe = q * d.E;
  SymMatrix qf = q * SymMatrix::column(d.F);
  SymMatrix qg = q * d.G;

  Explicitation e;
  e.name = d.name + "_expl";
  e.states = d.states;
  e.inputs = d.inputs;
  e.params = d.params;
  e.point = d.point;
  e.has_provenance = true;
  e.Q = q;
  e.E1 = qe.block(0, 0, r, d.n()).simplified();
  e.E1_dagger = right_inverse(e.E1, nb, options.pivots);
  SymMatrix gv = kernel_basis(e.E1, nb, options.pivots);
  if (options.randomize && gv.cols() > 0) {
    QMatrix dq = random_unimodular(gv.cols(), rng);
    std::uniform_int_distribution<int> scale(1, 3);
    for (int j = 0; j < gv.cols(); ++j) {
      Rational c = scale(rng);
      for (int i = 0; i < gv.cols(); ++i) dq(i, j) *= c;
    }
    gv = gv * to_sym(dq);
  }
  e.g_v = gv.simplified();
  SymMatrix f1 = qf.block(0, 0, r, 1), g1 = qg.block(0, 0, r, d.m());
  e.f = (e.E1_dagger * f1).simplified().col(0);
  e.g_u = (e.E1_dagger * g1).simplified();
  e.h = qf.block(r, 0, l - r, 1).simplified().col(0);
  e.l_u = qg.block(r, 0, l - r, d.m()).simplified();

  std::set<std::string> taken = d.symbols();
  taken.insert(d.inputs.begin(), d.inputs.end());
  for (int k = 1; k <= e.s(); ++k) {
    std::string v = "v" + std::to_string(k);
    while (taken.count(v)) v += "_";
    taken.insert(v);
    e.drives.push_back(v);
  }

  require_pass(check_identity("QE = [E1; 0]", qe - vstack(e.E1, SymMatrix(l - r, d.n())), nb));
  require_pass(check_identity("E1 g_v = 0", e.E1 * e.g_v, nb));
  require_pass(check_identity("E1 f = F1", e.E1 * SymMatrix::column(e.f) - f1, nb));
  require_pass(check_identity("E1 g_u = G1", e.E1 * e.g_u - g1, nb));
  RankInfo kr = numeric_rank(e.g_v, nb);
  if (kr.rank != e.s() || !kr.constant) throw Error(ErrorCode::Certification, "kernel basis of E1 is not independent");
  return e;
}

std::string format_explicitation(const Explicitation& e) {
  std::ostringstream os;
  os << "[system]\nname=" << e.name << "\n\n[states]\n";
  write_names(os, e.states);
  os << "\n[inputs]\n";
  write_names(os, e.inputs);
  os << "\n[drives]\n";
  write_names(os, e.drives);
  if (!e.params.empty()) {
    os << "\n[params]\n";
    for (std::size_t i = 0; i < e.params.size(); ++i)
      os << (i ? " " : "") << e.params[i].first << "=" << e.params[i].second.get_str();
    os << "\n";
  }
  os << "\n[point]\n";
  for (std::size_t i = 0; i < e.states.size(); ++i)
    os << (i ? " " : "") << e.states[i] << "=" << format_double(e.point.at(e.states[i]));
  os << "\n\n[f]\n";
  for (const auto& x : e.f) os << x.str() << "\n";
  os << "\n[g_u]\n";
  write_rows(os, e.g_u);
  os << "\n[g_v]\n";
  write_rows(os, e.g_v);
  os << "\n[h]\n";
  for (const auto& x : e.h) os << x.str() << "\n";
  os << "\n[l_u]\n";
  write_rows(os, e.l_u);
  return os.str();
}

Explicitation parse_explicitation(std::string_view text, const std::string& source) {
  SectionedText file(text, source);
  Explicitation e;
  e.name = "explicitation";
  if (const TextSection* s = file.find("system"))
    for (const auto& [k, v] : file.assignments(*s))
      if (k == "name") e.name = v;
  e.states = file.names(file.require("states"));
  if (const TextSection* s = file.find("inputs")) e.inputs = file.names(*s);
  if (const TextSection* s = file.find("drives")) e.drives = file.names(*s);
  std::set<std::string> known(e.states.begin(), e.states.end());
  std::set<std::string> param_names;
  if (const TextSection* s = file.find("params")) {
    for (const auto& [k, v] : file.assignments(*s)) {
      Expr x = file.expression(v, s->line, {});
      if (!x.is_number()) file.fail(ErrorCode::Schema, s->line, "parameter '" + k + "' must be a number");
      e.params.emplace_back(k, x.value());
      e.point.set(k, x.value().get_d());
      param_names.insert(k);
    }
  }
  known.insert(param_names.begin(), param_names.end());
  const TextSection& pt = file.require("point");
  for (const auto& [k, v] : file.assignments(pt)) {
    if (!known.count(k) || param_names.count(k))
      file.fail(ErrorCode::UnknownIdentifier, pt.line, "point binds unknown state '" + k + "'");
    e.point.set(k, evaluate(file.expression(v, pt.line, param_names), e.point));
  }
  for (const auto& s : e.states)
    if (!e.point.has(s)) file.fail(ErrorCode::Schema, pt.line, "working point does not bind '" + s + "'");
  const int n = e.n();
  auto matrix = [&](const std::string& name, int rows, int cols) {
    const TextSection* s = file.find(name);
    SymMatrix m(std::max(rows, 0), cols);
    if (s == nullptr || s->lines.empty()) {
      if (rows > 0 && cols > 0) file.fail(ErrorCode::Schema, s ? s->line : 0, "missing section [" + name + "]");
      return m;
    }
    auto rs = file.rows(*s, known);
    if (rows < 0) rows = static_cast<int>(rs.size());
    if (static_cast<int>(rs.size()) != rows)
      file.fail(ErrorCode::Dimension, s->line, name + " has " + std::to_string(rs.size()) + " rows");
    m = SymMatrix(rows, cols);
    for (int i = 0; i < rows; ++i) {
      const auto& r = rs[static_cast<std::size_t>(i)];
      if (static_cast<int>(r.size()) != cols)
        file.fail(ErrorCode::Dimension, s->lines[static_cast<std::size_t>(i)].number,
                  name + " row has " + std::to_string(r.size()) + " entries, expected " + std::to_string(cols));
      for (int j = 0; j < cols; ++j) m(i, j) = r[static_cast<std::size_t>(j)];
    }
    return m;
  };
  e.f = matrix("f", n, 1).col(0);
  e.g_u = matrix("g_u", n, e.m());
  e.g_v = matrix("g_v", n, static_cast<int>(e.drives.size()));
  SymMatrix h = matrix("h", -1, 1);
  e.h = h.col(0);
  e.l_u = matrix("l_u", e.p(), e.m());
  return e;
}

SysFbWitness identity_sys_witness(const Explicitation& e) {
  SysFbWitness w;
  for (const auto& s : e.states) w.psi.push_back(Expr::symbol(s));
  w.alpha_u.assign(static_cast<std::size_t>(e.m()), Expr(0));
  w.beta_u = SymMatrix::identity(e.m());
  w.alpha_v.assign(static_cast<std::size_t>(e.s()), Expr(0));
  w.beta_v = SymMatrix::identity(e.s());
  w.lambda = SymMatrix(e.s(), e.m());
  w.gamma = SymMatrix(e.n(), e.p());
  w.eta = SymMatrix::identity(e.p());
  return w;
}

EquivalenceReport verify_sys_fb_equivalence(const Explicitation& a, const Explicitation& b, const SysFbWitness& w,
                                            const Settings& settings) {
  check_dims(a, b);
  const int n = a.n(), m = a.m(), s = a.s(), p = a.p();
  auto dims_ok = [](const SymMatrix& x, int r, int c) { return x.rows() == r && x.cols() == c; };
  if (static_cast<int>(w.psi.size()) != n || static_cast<int>(w.alpha_u.size()) != m ||
      static_cast<int>(w.alpha_v.size()) != s || !dims_ok(w.beta_u, m, m) || !dims_ok(w.beta_v, s, s) ||
      !dims_ok(w.lambda, s, m) || !dims_ok(w.gamma, n, p) || !dims_ok(w.eta, p, p)) {
    throw Error(ErrorCode::Dimension, "witness dimensions do not match the explicitations");
  }
  SymMatrix jpsi = jacobian(w.psi, a.states);
  require_invertible(jpsi, a.point, "the Jacobian of psi", settings);
  require_invertible(w.beta_u, a.point, "beta_u", settings);
  require_invertible(w.beta_v, a.point, "beta_v", settings);
  require_invertible(w.eta, a.point, "eta", settings);

  auto to_a = composition(b, w.psi);
  auto compose = [&](const SymMatrix& x) { return x.substituted(to_a); };
  Neighborhood nb = neighborhood(a, settings, 0x52);
  SymMatrix f = SymMatrix::column(a.f), h = SymMatrix::column(a.h);
  SymMatrix au = SymMatrix::column(w.alpha_u), av = SymMatrix::column(w.alpha_v);
  SymMatrix jg = jpsi * w.gamma;
  SymMatrix drive = av + w.lambda * au;

  SymMatrix f_rhs = jpsi * (f + a.g_u * au + a.g_v * drive) + jg * (h + a.l_u * au);
  SymMatrix gu_rhs = jpsi * (a.g_u * w.beta_u + a.g_v * w.lambda * w.beta_u) + jg * a.l_u * w.beta_u;
  SymMatrix gv_rhs = jpsi * a.g_v * w.beta_v;
  SymMatrix h_rhs = w.eta * (h + a.l_u * au);
  SymMatrix lu_rhs = w.eta * a.l_u * w.beta_u;

  EquivalenceReport rep;
  rep.relations.push_back(check_identity("f relation", compose(SymMatrix::column(b.f)) - f_rhs, nb));
  rep.relations.push_back(check_identity("g_u relation", compose(b.g_u) - gu_rhs, nb));
  rep.relations.push_back(check_identity("g_v relation", compose(b.g_v) - gv_rhs, nb));
  rep.relations.push_back(check_identity("h relation", compose(SymMatrix::column(b.h)) - h_rhs, nb));
  rep.relations.push_back(check_identity("l_u relation", compose(b.l_u) - lu_rhs, nb));
  rep.verdict = Verdict::Pass;
  for (const auto& r : rep.relations) rep.verdict = combine(rep.verdict, r.verdict);
  return rep;
}

SysFbWitness sys_witness_from_ex_fb(const Explicitation& a, const Explicitation& b, const ExFbWitness& w,
                                    const Settings& settings) {
  require_provenance(a);
  require_provenance(b);
  check_dims(a, b);
  const int n = a.n(), r = a.E1.rows(), l = a.Q.rows();
  Neighborhood nb = neighborhood(a, settings, 0x53);
  auto to_a = composition(b, w.psi);
  SymMatrix jpsi = jacobian(w.psi, a.states);
  SymMatrix jinv = inverse(jpsi, nb);
  SymMatrix t = (b.Q.substituted(to_a) * w.Q * inverse(a.Q, nb)).simplified();
  for (int i = r; i < l; ++i)
    for (int j = 0; j < r; ++j)
      if (is_zero(t(i, j), nb).state != ZeroTest::State::Zero)
        throw Error(ErrorCode::Certification, "transformed Q is not block upper triangular");
  SymMatrix lift = jinv * b.E1_dagger.substituted(to_a);
  SymMatrix k = lift * t.block(0, 0, r, r);
  SymMatrix gv_plus = left_inverse(a.g_v, nb);
  SymMatrix defect = k * a.E1 - SymMatrix::identity(n);

  SysFbWitness sw;
  sw.psi = w.psi;
  sw.alpha_u = w.alpha_u;
  sw.beta_u = w.beta_u;
  sw.gamma = (lift * t.block(0, r, r, l - r)).simplified();
  sw.eta = t.block(r, r, l - r, l - r);
  sw.alpha_v = (gv_plus * defect * SymMatrix::column(a.f)).simplified().col(0);
  sw.lambda = (gv_plus * defect * a.g_u).simplified();
  sw.beta_v = (gv_plus * jinv * b.g_v.substituted(to_a)).simplified();
  return sw;
}

SysFbWitness class_witness(const Explicitation& a, const Explicitation& b, const Settings& settings) {
  require_provenance(a);
  require_provenance(b);
  if (a.states != b.states || a.Q.rows() != b.Q.rows()) {
    throw Error(ErrorCode::Argument, "explicitations do not come from the same system");
  }
  ExFbWitness id;
  id.Q = SymMatrix::identity(a.Q.rows());
  for (const auto& s : a.states) id.psi.push_back(Expr::symbol(s));
  id.alpha_u.assign(static_cast<std::size_t>(a.m()), Expr(0));
  id.beta_u = SymMatrix::identity(a.m());
  return sys_witness_from_ex_fb(a, b, id, settings);
}

ExFbWitness ex_fb_from_sys_witness(const Explicitation& a, const Explicitation& b, const SysFbWitness& w,
                                   const Settings& settings) {
  require_provenance(a);
  require_provenance(b);
  check_dims(a, b);
  const int r = a.E1.rows(), l = a.Q.rows();
  Neighborhood nb = neighborhood(a, settings, 0x54);
  auto to_a = composition(b, w.psi);
  SymMatrix jpsi = jacobian(w.psi, a.states);
  SymMatrix q1 = b.E1.substituted(to_a) * jpsi * a.E1_dagger;
  SymMatrix top = hstack(q1, q1 * a.E1 * w.gamma);
  SymMatrix inner = vstack(top, hstack(SymMatrix(l - r, r), w.eta));
  ExFbWitness out;
  out.Q = (inverse(b.Q.substituted(to_a).simplified(), nb) * inner * a.Q).simplified();
  out.psi = w.psi;
  out.alpha_u = w.alpha_u;
  out.beta_u = w.beta_u;
  return out;
}

}  // namespace dacsfl
