// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#include "dacsfl/dacs_model.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "dacsfl/textfile.hpp"

namespace dacsfl {

namespace {

const std::set<std::string> kReserved = {"t", "sin", "cos", "tan", "sec", "exp", "log", "sqrt"};

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

SymMatrix to_matrix(const SectionedText& file, const TextSection& s, const std::vector<std::vector<Expr>>& rows,
                    int expected_rows, int expected_cols, const std::string& what) {
  if (static_cast<int>(rows.size()) != expected_rows) {
    file.fail(ErrorCode::Dimension, s.line,
              what + " has " + std::to_string(rows.size()) + " rows, expected " + std::to_string(expected_rows));
  }
  SymMatrix m(expected_rows, expected_cols);
  for (int i = 0; i < expected_rows; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    if (static_cast<int>(r.size()) != expected_cols) {
      file.fail(ErrorCode::Dimension, s.lines[static_cast<std::size_t>(i)].number,
                what + " row has " + std::to_string(r.size()) + " entries, expected " + std::to_string(expected_cols));
    }
    for (int j = 0; j < expected_cols; ++j) m(i, j) = r[static_cast<std::size_t>(j)];
  }
  return m;
}

SymMatrix optional_matrix(const SectionedText& file, const std::string& section, const std::set<std::string>& known,
                          int rows, int cols, const std::string& what) {
  const TextSection* s = file.find(section);
  if (!s || (s->lines.empty() && (rows == 0 || cols == 0))) {
    if (s == nullptr && rows > 0 && cols > 0) file.fail(ErrorCode::Schema, 0, "missing section [" + section + "]");
    return SymMatrix(rows, cols);
  }
  return to_matrix(file, *s, file.rows(*s, known), rows, cols, what);
}

}  // namespace

std::set<std::string> Dacs::symbols() const {
  std::set<std::string> s(states.begin(), states.end());
  for (const auto& [k, v] : params) s.insert(k);
  return s;
}

std::map<std::string, Expr> Dacs::param_values() const {
  std::map<std::string, Expr> m;
  for (const auto& [k, v] : params) m[k] = Expr(v);
  return m;
}

void Dacs::validate() const {
  std::set<std::string> seen;
  auto claim = [&](const std::string& name) {
    if (!is_identifier(name)) throw Error(ErrorCode::Schema, "invalid name '" + name + "'");
    if (kReserved.count(name)) throw Error(ErrorCode::Schema, "name '" + name + "' is reserved");
    if (!seen.insert(name).second) throw Error(ErrorCode::Schema, "duplicate name '" + name + "'");
  };
  for (const auto& s : states) claim(s);
  for (const auto& s : inputs) claim(s);
  for (const auto& [k, v] : params) claim(k);
  if (states.empty()) throw Error(ErrorCode::Schema, "system has no states");
  if (E.cols() != n()) throw Error(ErrorCode::Dimension, "E has " + std::to_string(E.cols()) + " columns, expected n");
  if (static_cast<int>(F.size()) != l()) throw Error(ErrorCode::Dimension, "F length differs from the rows of E");
  if (G.rows() != l() || G.cols() != m()) throw Error(ErrorCode::Dimension, "G must be l x m");
  std::set<std::string> known = symbols();
  auto check_expr = [&](const Expr& e, const std::string& where) {
    for (const auto& s : free_symbols(e))
      if (!known.count(s)) throw Error(ErrorCode::UnknownIdentifier, "undeclared identifier '" + s + "' in " + where);
    if (!std::isfinite(evaluate(e, point))) {
      throw Error(ErrorCode::Schema, where + " is not evaluable at the working point: " + e.str());
    }
  };
  for (const auto& s : known)
    if (!point.has(s)) throw Error(ErrorCode::Schema, "working point does not bind '" + s + "'");
  for (int i = 0; i < l(); ++i) {
    for (int j = 0; j < n(); ++j) check_expr(E(i, j), "E");
    check_expr(F[static_cast<std::size_t>(i)], "F");
    for (int j = 0; j < m(); ++j) check_expr(G(i, j), "G");
  }
}

Dacs parse_system(std::string_view text, const std::string& source) {
  SectionedText file(text, source);
  Dacs d;
  d.name = "system";
  if (const TextSection* s = file.find("system")) {
    for (const auto& [k, v] : file.assignments(*s)) {
      if (k == "name") d.name = v;
    }
  }
  d.states = file.names(file.require("states"));
  if (const TextSection* s = file.find("inputs")) d.inputs = file.names(*s);
  if (const TextSection* s = file.find("params")) {
    for (const auto& [k, v] : file.assignments(*s)) {
      Expr e = file.expression(v, s->line, {});
      if (!e.is_number()) file.fail(ErrorCode::Schema, s->line, "parameter '" + k + "' must be a number");
      d.params.emplace_back(k, e.value());
      d.point.set(k, e.value().get_d());
    }
  }
  std::set<std::string> param_names;
  for (const auto& [k, v] : d.params) param_names.insert(k);
  const TextSection& pt = file.require("point");
  std::set<std::string> state_set(d.states.begin(), d.states.end());
  for (const auto& [k, v] : file.assignments(pt)) {
    if (!state_set.count(k)) file.fail(ErrorCode::UnknownIdentifier, pt.line, "point binds unknown state '" + k + "'");
    Expr e = file.expression(v, pt.line, param_names);
    d.point.set(k, evaluate(e, d.point));
  }
  std::set<std::string> known = state_set;
  known.insert(param_names.begin(), param_names.end());
  const TextSection& es = file.require("E");
  auto erows = file.rows(es, known);
  if (erows.empty()) file.fail(ErrorCode::Dimension, es.line, "E has no rows");
  int l = static_cast<int>(erows.size());
  d.E = to_matrix(file, es, erows, l, d.n(), "E");
  const TextSection& fs = file.require("F");
  SymMatrix fcol = to_matrix(file, fs, file.rows(fs, known), l, 1, "F");
  d.F = fcol.col(0);
  d.G = optional_matrix(file, "G", known, l, d.m(), "G");
  try {
    d.validate();
  } catch (const Error& e) {
    throw Error(e.code(), source + ": " + e.what());
  }
  return d;
}

Dacs load_system(const std::string& path) { return parse_system(read_file(path), path); }

std::string format_system(const Dacs& d) {
  std::ostringstream os;
  os << "[system]\nname=" << d.name << "\n\n[states]\n";
  for (std::size_t i = 0; i < d.states.size(); ++i) os << (i ? " " : "") << d.states[i];
  os << "\n\n[inputs]\n";
  for (std::size_t i = 0; i < d.inputs.size(); ++i) os << (i ? " " : "") << d.inputs[i];
  os << "\n";
  if (!d.params.empty()) {
    os << "\n[params]\n";
    for (std::size_t i = 0; i < d.params.size(); ++i)
      os << (i ? " " : "") << d.params[i].first << "=" << d.params[i].second.get_str();
    os << "\n";
  }
  os << "\n[point]\n";
  for (std::size_t i = 0; i < d.states.size(); ++i)
    os << (i ? " " : "") << d.states[i] << "=" << format_double(d.point.at(d.states[i]));
  os << "\n\n[E]\n";
  write_rows(os, d.E);
  os << "\n[F]\n";
  for (const auto& f : d.F) os << f.str() << "\n";
  if (d.m() > 0) {
    os << "\n[G]\n";
    write_rows(os, d.G);
  }
  return os.str();
}

Neighborhood neighborhood(const Dacs& d, const Settings& settings, std::uint64_t salt) {
  return Neighborhood(d.point, d.states, settings, salt);
}

Dacs to_dacs(const LinearDacs& ld, const std::vector<std::string>& states, const std::vector<std::string>& inputs,
             const std::string& name) {
  Dacs d;
  d.name = name;
  for (int j = 0; j < ld.n(); ++j)
    d.states.push_back(states.empty() ? "x" + std::to_string(j + 1) : states[static_cast<std::size_t>(j)]);
  for (int j = 0; j < ld.m(); ++j)
    d.inputs.push_back(inputs.empty() ? "u" + std::to_string(j + 1) : inputs[static_cast<std::size_t>(j)]);
  d.E = SymMatrix(ld.l(), ld.n());
  d.G = SymMatrix(ld.l(), ld.m());
  for (int i = 0; i < ld.l(); ++i) {
    std::vector<Expr> terms;
    for (int j = 0; j < ld.n(); ++j) {
      d.E(i, j) = Expr(ld.E(i, j));
      if (ld.H(i, j) != 0) terms.push_back(Expr(ld.H(i, j)) * Expr::symbol(d.states[static_cast<std::size_t>(j)]));
    }
    d.F.push_back(Expr::sum(terms));
    for (int j = 0; j < ld.m(); ++j) d.G(i, j) = Expr(ld.L(i, j));
  }
  for (const auto& s : d.states) d.point.set(s, 0.0);
  d.validate();
  return d;
}

std::optional<LinearDacs> as_linear(const Dacs& d) {
  auto params = d.param_values();
  LinearDacs ld{QMatrix(d.l(), d.n()), QMatrix(d.l(), d.n()), QMatrix(d.l(), d.m())};
  auto constant = [&](const Expr& e, Rational& out) {
    Expr s = simplify(substitute(e, params));
    if (!s.is_number()) return false;
    out = s.value();
    return true;
  };
  for (int i = 0; i < d.l(); ++i) {
    for (int j = 0; j < d.n(); ++j)
      if (!constant(d.E(i, j), ld.E(i, j))) return std::nullopt;
    for (int j = 0; j < d.m(); ++j)
      if (!constant(d.G(i, j), ld.L(i, j))) return std::nullopt;
    Expr f = substitute(d.F[static_cast<std::size_t>(i)], params);
    std::vector<Expr> terms = {f};
    for (int j = 0; j < d.n(); ++j) {
      const std::string& x = d.states[static_cast<std::size_t>(j)];
      if (!constant(differentiate(f, x), ld.H(i, j))) return std::nullopt;
      terms.push_back(-(Expr(ld.H(i, j)) * Expr::symbol(x)));
    }
    if (!simplify(Expr::sum(terms)).is_zero()) return std::nullopt;
  }
  return ld;
}

ExFbWitness parse_witness(std::string_view text, const Dacs& source, const std::string& where) {
  SectionedText file(text, where);
  std::set<std::string> known = source.symbols();
  ExFbWitness w;
  const TextSection& q = file.require("Q");
  w.Q = to_matrix(file, q, file.rows(q, known), source.l(), source.l(), "Q");
  const TextSection& p = file.require("psi");
  w.psi = to_matrix(file, p, file.rows(p, known), source.n(), 1, "psi").col(0);
  if (const TextSection* a = file.find("alpha_u"); a && !a->lines.empty()) {
    w.alpha_u = to_matrix(file, *a, file.rows(*a, known), source.m(), 1, "alpha_u").col(0);
  } else {
    w.alpha_u.assign(static_cast<std::size_t>(source.m()), Expr(0));
  }
  if (const TextSection* b = file.find("beta_u"); b && !b->lines.empty()) {
    w.beta_u = to_matrix(file, *b, file.rows(*b, known), source.m(), source.m(), "beta_u");
  } else {
    w.beta_u = SymMatrix::identity(source.m());
  }
  return w;
}

ExFbWitness load_witness(const std::string& path, const Dacs& source) {
  return parse_witness(read_file(path), source, path);
}

ExFbWitness identity_witness(const Dacs& d) {
  ExFbWitness w;
  w.Q = SymMatrix::identity(d.l());
  for (const auto& s : d.states) w.psi.push_back(Expr::symbol(s));
  w.alpha_u.assign(static_cast<std::size_t>(d.m()), Expr(0));
  w.beta_u = SymMatrix::identity(d.m());
  return w;
}

RelationCheck check_identity(const std::string& name, const SymMatrix& residual, const Neighborhood& nb) {
  RelationCheck rc;
  rc.name = name;
  std::vector<std::pair<std::pair<int, int>, Compiled>> live;
  std::vector<Expr> live_exprs;
  for (int i = 0; i < residual.rows(); ++i)
    for (int j = 0; j < residual.cols(); ++j) {
      Expr s = simplify(residual(i, j));
      if (s.is_zero()) continue;
      live.emplace_back(std::make_pair(i, j), Compiled(s, nb.slots()));
      live_exprs.push_back(s);
    }
  if (live.empty()) {
    rc.verdict = Verdict::Pass;
    rc.symbolic = true;
    rc.detail = "residual simplifies to zero";
    return rc;
  }
  const Settings& st = nb.settings();
  int finite = 0;
  std::string worst_where;
  auto probe = [&](const Point& p) {
    std::vector<double> v = nb.slot_values(p);
    for (std::size_t k = 0; k < live.size(); ++k) {
      double x = live[k].second(v.data());
      if (!std::isfinite(x)) continue;
      ++finite;
      if (std::fabs(x) > rc.max_residual) {
        rc.max_residual = std::fabs(x);
        worst_where = "entry (" + std::to_string(live[k].first.first + 1) + "," +
                      std::to_string(live[k].first.second + 1) + ") = " + live_exprs[k].str();
      }
    }
  };
  probe(nb.center());
  int n = std::min<int>(st.verify_samples, static_cast<int>(nb.samples().size()));
  for (int s = 0; s < n; ++s) probe(nb.samples()[static_cast<std::size_t>(s)]);
  if (finite == 0) {
    rc.verdict = Verdict::Undecided;
    rc.detail = "residual is singular at every sample";
  } else if (rc.max_residual <= st.tol_residual) {
    rc.verdict = Verdict::Pass;
    rc.detail = "numerically zero at " + std::to_string(n + 1) + " points";
  } else {
    rc.verdict = Verdict::Fail;
    rc.detail = "max residual at " + worst_where;
  }
  return rc;
}

std::string EquivalenceReport::text() const {
  std::ostringstream os;
  for (const auto& r : relations) {
    os << r.name << ": " << verdict_name(r.verdict) << " (" << (r.symbolic ? "symbolic" : "sampled")
       << ", max residual " << r.max_residual << ")";
    if (!r.detail.empty()) os << " " << r.detail;
    os << "\n";
  }
  os << "verdict: " << verdict_name(verdict) << "\n";
  return os.str();
}

namespace {

void require_invertible(const SymMatrix& m, const Point& p, const std::string& what, const Settings& st) {
  if (m.rows() == 0) return;
  Eigen::MatrixXd v = m.evaluate(p);
  if (!v.allFinite() || numeric_rank(v, st.tol_rank, st.tol_zero) < m.rows()) {
    throw Error(ErrorCode::Certification, what + " is not invertible at the working point");
  }
}

}  // namespace

EquivalenceReport verify_ex_fb_equivalence(const Dacs& a, const Dacs& b, const ExFbWitness& w,
                                           const Settings& settings) {
  if (a.l() != b.l() || a.n() != b.n() || a.m() != b.m()) {
    throw Error(ErrorCode::Dimension, "systems have different (l, n, m)");
  }
  if (w.Q.rows() != a.l() || w.Q.cols() != a.l() || static_cast<int>(w.psi.size()) != a.n() ||
      static_cast<int>(w.alpha_u.size()) != a.m() || w.beta_u.rows() != a.m() || w.beta_u.cols() != a.m()) {
    throw Error(ErrorCode::Dimension, "witness dimensions do not match the systems");
  }
  SymMatrix jpsi = jacobian(w.psi, a.states);
  require_invertible(w.Q, a.point, "Q", settings);
  require_invertible(jpsi, a.point, "the Jacobian of psi", settings);
  require_invertible(w.beta_u, a.point, "beta_u", settings);

  std::map<std::string, Expr> to_a = b.param_values();
  for (int i = 0; i < b.n(); ++i) to_a[b.states[static_cast<std::size_t>(i)]] = w.psi[static_cast<std::size_t>(i)];
  auto compose = [&](const SymMatrix& m) { return m.substituted(to_a); };
  Neighborhood nb = neighborhood(a, settings, 0x51);
  SymMatrix ge = a.G * SymMatrix::column(w.alpha_u);
  SymMatrix f_plus = SymMatrix::column(a.F) + ge;

  EquivalenceReport rep;
  rep.relations.push_back(check_identity("E relation", compose(b.E) * jpsi - w.Q * a.E, nb));
  rep.relations.push_back(check_identity("F relation", compose(SymMatrix::column(b.F)) - w.Q * f_plus, nb));
  rep.relations.push_back(check_identity("G relation", compose(b.G) - w.Q * a.G * w.beta_u, nb));
  rep.verdict = Verdict::Pass;
  for (const auto& r : rep.relations) rep.verdict = combine(rep.verdict, r.verdict);
  return rep;
}

std::optional<std::vector<double>> invert_map(const std::vector<Expr>& map, const std::vector<std::string>& vars,
                                              const Point& fixed, const std::vector<double>& target,
                                              std::vector<double> guess, double tol) {
  std::vector<std::string> slots = vars;
  for (const auto& [k, v] : fixed.values())
    if (std::find(vars.begin(), vars.end(), k) == vars.end()) slots.push_back(k);
  std::vector<Compiled> f, jac;
  for (const auto& e : map) f.emplace_back(simplify(e), slots);
  SymMatrix j = jacobian(map, vars);
  for (int r = 0; r < j.rows(); ++r)
    for (int c = 0; c < j.cols(); ++c) jac.emplace_back(simplify(j(r, c)), slots);
  const std::size_t n = vars.size();
  std::vector<double> buf(slots.size());
  for (std::size_t k = n; k < slots.size(); ++k) buf[k] = fixed.at(slots[k]);
  auto residual = [&](const std::vector<double>& x, Eigen::VectorXd& r) {
    std::copy(x.begin(), x.end(), buf.begin());
    r.resize(static_cast<Eigen::Index>(map.size()));
    for (std::size_t i = 0; i < map.size(); ++i) r(static_cast<Eigen::Index>(i)) = f[i](buf.data()) - target[i];
    return r.allFinite();
  };
  Eigen::VectorXd r;
  if (!residual(guess, r)) return std::nullopt;
  for (int iter = 0; iter < 60; ++iter) {
    if (r.lpNorm<Eigen::Infinity>() <= tol) return guess;
    std::copy(guess.begin(), guess.end(), buf.begin());
    Eigen::MatrixXd jm(static_cast<Eigen::Index>(map.size()), static_cast<Eigen::Index>(n));
    for (int a = 0; a < j.rows(); ++a)
      for (int b = 0; b < j.cols(); ++b) jm(a, b) = jac[static_cast<std::size_t>(a * j.cols() + b)](buf.data());
    Eigen::VectorXd step = jm.completeOrthogonalDecomposition().solve(r);
    double damping = 1.0;
    bool improved = false;
    for (int k = 0; k < 30 && !improved; ++k, damping *= 0.5) {
      std::vector<double> trial = guess;
      for (std::size_t i = 0; i < n; ++i) trial[i] -= damping * step(static_cast<Eigen::Index>(i));
      Eigen::VectorXd rt;
      if (residual(trial, rt) && rt.norm() < r.norm()) {
        guess = trial;
        r = rt;
        improved = true;
      }
    }
    if (!improved) break;
  }
  if (r.lpNorm<Eigen::Infinity>() <= tol) return guess;
  return std::nullopt;
}

}  // namespace dacsfl
