// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#include "dacsfl/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dacsfl {

namespace {

Neighborhood make_nb(const Dacs& d, const std::vector<std::string>& kept, const std::map<std::string, Expr>& elim,
                     const Settings& settings, std::uint64_t salt) {
  return Neighborhood(d.point, kept, settings, salt, elim);
}

// Basis of the tangent space of the constraint set, evaluated on it.
SymMatrix tangent_basis(const Dacs& d, const std::vector<Expr>& constraints, const std::map<std::string, Expr>& elim,
                        const Neighborhood& nb) {
  if (constraints.empty()) return SymMatrix::identity(d.n());
  SymMatrix j = jacobian(constraints, d.states).substituted(elim);
  return kernel_basis(j, nb);
}

Expr normalize_constraint(const Expr& c) {
  Expr num = numer_denom(c).first;
  if (leading_sign(num) < 0) num = simplify(-num);
  return num;
}

// Solves c = 0 for one kept state that enters c affinely with a coefficient
// nonzero at the working point, preferring constant coefficients.
bool solve_constraint(const Expr& c, const std::vector<std::string>& kept, const Point& center, double tol,
                      std::string& var, Expr& solution) {
  int best = -1;
  Expr best_sol;
  bool best_const = false;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const std::string& v = kept[i];
    if (!depends_on(c, v)) continue;
    Expr coeff = differentiate(c, v);
    if (depends_on(coeff, v)) continue;
    double val = evaluate(coeff, center);
    if (!std::isfinite(val) || std::fabs(val) <= tol) continue;
    Expr sol = simplify(Expr::symbol(v) - c / coeff);
    if (depends_on(sol, v)) continue;
    bool is_const = coeff.is_number();
    if (best < 0 || (is_const && !best_const)) {
      best = static_cast<int>(i);
      best_sol = sol;
      best_const = is_const;
    }
  }
  if (best < 0) return false;
  var = kept[static_cast<std::size_t>(best)];
  solution = best_sol;
  return true;
}

}  // namespace

Neighborhood manifold_neighborhood(const Dacs& d, const ReductionTrace& t, const Settings& settings,
                                   std::uint64_t salt) {
  return make_nb(d, t.kept_states, t.elimination, settings, salt);
}

ReductionTrace reduce(const Dacs& d, const Settings& settings) {
  ReductionTrace t;
  t.kept_states = d.states;
  ReductionStep s0;
  s0.k = 0;
  s0.dim = d.n();
  t.steps.push_back(s0);
  const double tol = settings.tol_nonzero;
  for (int k = 1; k <= d.n() + 1; ++k) {
    Neighborhood nb = make_nb(d, t.kept_states, t.elimination, settings, static_cast<std::uint64_t>(k));
    SymMatrix e = d.E.substituted(t.elimination).simplified();
    SymMatrix g = d.G.substituted(t.elimination).simplified();
    std::vector<Expr> f;
    for (const auto& x : d.F) f.push_back(simplify(substitute(x, t.elimination)));
    SymMatrix p = tangent_basis(d, t.constraints, t.elimination, nb);
    SymMatrix b = hstack(e * p, g);
    RowReduction rr = row_reduce(b, nb);
    ReductionStep step;
    step.k = k;
    step.annihilator = rr.Q.block(rr.rank, 0, d.l() - rr.rank, d.l());
    std::vector<Expr> cands = step.annihilator * f;
    for (Expr c : cands) {
      c = simplify(substitute(c, t.elimination));
      if (c.is_zero()) continue;
      Neighborhood cur = make_nb(d, t.kept_states, t.elimination, settings, static_cast<std::uint64_t>(k));
      double at = evaluate(c, d.point);
      if (!std::isfinite(at) || std::fabs(at) > tol) {
        t.admissible = false;
        t.diagnostic = "constraint " + c.str() + " does not vanish at the working point (value " +
                       std::to_string(at) + ")";
        step.new_constraints.push_back(normalize_constraint(c));
        step.constraints = t.constraints;
        step.constraints.push_back(step.new_constraints.back());
        step.dim = static_cast<int>(t.kept_states.size());
        t.steps.push_back(step);
        t.k_star = k - 1;
        return t;
      }
      ZeroTest z = is_zero(c, cur);
      if (z.state == ZeroTest::State::Zero) {
        step.discarded.push_back(c);
        continue;
      }
      if (z.state == ZeroTest::State::Unknown) {
        throw Error(ErrorCode::Certification, "cannot certify whether constraint " + c.str() + " vanishes near the point");
      }
      Expr nc = normalize_constraint(c);
      std::string var;
      Expr sol;
      if (!solve_constraint(nc, t.kept_states, d.point, tol, var, sol)) {
        throw Error(ErrorCode::NotSupported,
                    "constraint " + nc.str() + " cannot be solved affinely for any remaining state");
      }
      for (auto& [name, expr] : t.elimination) expr = simplify(substitute(expr, {{var, sol}}));
      t.elimination[var] = sol;
      t.kept_states.erase(std::find(t.kept_states.begin(), t.kept_states.end(), var));
      t.eliminated_states.push_back(var);
      t.constraints.push_back(nc);
      step.new_constraints.push_back(nc);
    }
    step.constraints = t.constraints;
    step.dim = static_cast<int>(t.kept_states.size());
    t.steps.push_back(step);
    if (step.new_constraints.empty()) {
      t.fixed_point = true;
      t.k_star = k - 1;
      return t;
    }
  }
  throw Error(ErrorCode::Numerical, "geometric reduction did not reach a fixed point");
}

CrResult check_cr(const Dacs& d, const ReductionTrace& t, const Settings& settings) {
  if (!t.admissible) throw Error(ErrorCode::Argument, "the working point is not admissible");
  Neighborhood nb = manifold_neighborhood(d, t, settings, 0xC0);
  SymMatrix p = tangent_basis(d, t.constraints, t.elimination, nb);
  SymMatrix ep = d.E.substituted(t.elimination) * p;
  SymMatrix g = d.G.substituted(t.elimination).simplified();
  CrResult cr;
  cr.n_star = static_cast<int>(t.kept_states.size());
  cr.rank_etm = numeric_rank(ep, nb);
  cr.rank_etm_g = numeric_rank(hstack(ep, g), nb);
  cr.r_star = cr.rank_etm.rank;
  cr.m_star = d.m() - (cr.rank_etm_g.rank - cr.rank_etm.rank);
  cr.ok = cr.rank_etm.constant && cr.rank_etm_g.constant;
  return cr;
}

Restriction restrict_system(const Dacs& d, const ReductionTrace& t, const Settings& settings) {
  CrResult cr = check_cr(d, t, settings);
  if (!cr.ok) throw Error(ErrorCode::Certification, "condition (CR) fails: ranks are not constant on M*");
  Neighborhood nb = manifold_neighborhood(d, t, settings, 0xC1);
  Restriction r;
  r.kept_states = t.kept_states;
  r.eliminated_states = t.eliminated_states;
  r.constraints = t.constraints;
  std::vector<Expr> emb;
  for (const auto& s : d.states) {
    auto it = t.elimination.find(s);
    r.embedding[s] = it == t.elimination.end() ? Expr::symbol(s) : it->second;
    emb.push_back(r.embedding[s]);
  }
  SymMatrix e1 = d.E.substituted(t.elimination) * jacobian(emb, t.kept_states);
  std::vector<Expr> f;
  for (const auto& x : d.F) f.push_back(simplify(substitute(x, t.elimination)));
  SymMatrix g = d.G.substituted(t.elimination).simplified();

  RowReduction rr1 = row_reduce(e1, nb);
  const int rs = rr1.rank;
  const int l = d.l();
  SymMatrix qf = rr1.Q * SymMatrix::column(f);
  SymMatrix qg = rr1.Q * g;
  SymMatrix fb = qf.block(rs, 0, l - rs, 1);
  SymMatrix gb = qg.block(rs, 0, l - rs, d.m());
  RowReduction rr2 = row_reduce(gb, nb);
  const int q = rr2.rank;
  SymMatrix fb2 = rr2.Q * fb;
  for (int i = q; i < l - rs; ++i) {
    if (is_zero(fb2(i, 0), nb).state != ZeroTest::State::Zero) {
      throw Error(ErrorCode::Certification,
                  "restriction: algebraic equation " + fb2(i, 0).str() + " = 0 does not hold on M*");
    }
  }
  SymMatrix q2full = SymMatrix::identity(l);
  for (int i = 0; i < l - rs; ++i)
    for (int j = 0; j < l - rs; ++j) q2full(rs + i, rs + j) = rr2.Q(i, j);
  r.Q = q2full * rr1.Q;

  SymMatrix g2 = rr2.reduced.block(0, 0, q, d.m());
  Eigen::MatrixXd g2v = g2.evaluate(d.point);
  std::vector<int> pinned;
  for (int j = d.m() - 1; j >= 0 && static_cast<int>(pinned.size()) < q; --j) {
    std::vector<int> trial = pinned;
    trial.push_back(j);
    Eigen::MatrixXd sub(q, static_cast<Eigen::Index>(trial.size()));
    for (std::size_t c = 0; c < trial.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = g2v.col(trial[c]);
    if (numeric_rank(sub, settings.tol_rank, settings.tol_zero) == static_cast<int>(trial.size())) pinned = trial;
  }
  if (static_cast<int>(pinned.size()) != q) {
    throw Error(ErrorCode::Singular, "no choice of inputs makes the pinned input block invertible");
  }
  std::sort(pinned.begin(), pinned.end());
  std::vector<int> kept;
  for (int j = 0; j < d.m(); ++j)
    if (std::find(pinned.begin(), pinned.end(), j) == pinned.end()) kept.push_back(j);
  for (int j : kept) r.kept_inputs.push_back(d.inputs[static_cast<std::size_t>(j)]);
  for (int j : pinned) r.pinned_inputs.push_back(d.inputs[static_cast<std::size_t>(j)]);

  SymMatrix f1 = qf.block(0, 0, rs, 1);
  SymMatrix g1 = qg.block(0, 0, rs, d.m());
  SymMatrix f2 = fb2.block(0, 0, q, 1);
  SymMatrix g11 = select_cols(g1, kept), g12 = select_cols(g1, pinned);
  SymMatrix g21 = select_cols(g2, kept), g22 = select_cols(g2, pinned);
  SymMatrix fstar = f1, gstar = g11;
  if (q > 0) {
    SymMatrix inv = inverse(g22, nb);
    fstar = f1 - g12 * inv * f2;
    gstar = g11 - g12 * inv * g21;
    std::vector<Expr> ustar;
    for (const auto& u : r.kept_inputs) ustar.push_back(Expr::symbol(u));
    SymMatrix pin = (Expr(-1) * inv) * (f2 + g21 * SymMatrix::column(ustar));
    for (std::size_t i = 0; i < r.pinned_inputs.size(); ++i) r.input_map[r.pinned_inputs[i]] = pin(static_cast<int>(i), 0);
  }
  for (const auto& u : r.kept_inputs) r.input_map[u] = Expr::symbol(u);

  Dacs& s = r.system;
  s.name = d.name + "_restricted";
  s.states = t.kept_states;
  s.inputs = r.kept_inputs;
  s.params = d.params;
  for (const auto& x : s.states) s.point.set(x, d.point.at(x));
  for (const auto& [k, v] : d.params) s.point.set(k, v.get_d());
  s.E = rr1.reduced.block(0, 0, rs, static_cast<int>(t.kept_states.size()));
  s.F = fstar.col(0);
  s.G = gstar;
  s.validate();
  r.r_star = rs;
  r.n_star = static_cast<int>(t.kept_states.size());
  r.m_star = static_cast<int>(kept.size());
  return r;
}

std::string format_trace(const ReductionTrace& t, const Dacs& d) {
  std::ostringstream os;
  os << "system: " << d.name << "\n";
  for (const auto& s : t.steps) {
    os << "M_" << s.k << ": dim " << s.dim;
    if (s.k == 0) {
      os << ", no constraints\n";
      continue;
    }
    if (s.new_constraints.empty()) {
      os << ", no new constraints\n";
    } else {
      os << ", new constraints:";
      for (const auto& c : s.new_constraints) os << " " << c.str() << " = 0;";
      os << "\n";
    }
    for (const auto& c : s.discarded) os << "  implied: " << c.str() << "\n";
  }
  if (t.admissible) {
    os << "k* = " << t.k_star << ", n* = " << t.kept_states.size() << ", admissible\n";
  } else {
    os << "inadmissible: " << t.diagnostic << "\n";
  }
  return os.str();
}

}  // namespace dacsfl
