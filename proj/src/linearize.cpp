// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#include "dacsfl/linearize.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "dacsfl/textfile.hpp"

namespace dacsfl {

namespace {

constexpr std::size_t kPoolLimit = 500;
constexpr int kSearchLimit = 20000;

std::vector<int> jumps_to_chains(const std::vector<int>& jumps) {
  std::vector<int> chains;
  const int top = jumps.empty() ? 0 : *std::max_element(jumps.begin(), jumps.end());
  for (int j = 1; j <= top; ++j) {
    int c = 0;
    for (int d : jumps)
      if (d >= j) ++c;
    chains.push_back(c);
  }
  return chains;
}

bool non_increasing(const std::vector<int>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1]) return false;
  return true;
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

Expr lie_derivative(const Expr& h, const VectorField& x, const std::vector<std::string>& vars) {
  std::vector<Expr> terms;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (x[i].is_zero()) continue;
    Expr d = differentiate(h, vars[i]);
    if (!d.is_zero()) terms.push_back(d * x[i]);
  }
  return simplify(Expr::sum(terms));
}

VectorField column_of(const SymMatrix& m, int j, const std::map<std::string, Expr>& params) {
  VectorField v;
  for (int i = 0; i < m.rows(); ++i) v.push_back(simplify(substitute(m(i, j), params)));
  return v;
}

std::vector<Expr> sorted_unique(std::vector<Expr> v) {
  std::sort(v.begin(), v.end(), [](const Expr& a, const Expr& b) {
    std::string sa = a.str(), sb = b.str();
    return sa != sb ? sa < sb : compare(a, b) < 0;
  });
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

SymMatrix sym_from(const QMatrix& q) {
  SymMatrix s(q.rows(), q.cols());
  for (int i = 0; i < q.rows(); ++i)
    for (int j = 0; j < q.cols(); ++j) s(i, j) = Expr(q(i, j));
  return s;
}

// Chain search state over the explicitation.
class ChainSearch {
 public:
  ChainSearch(const Explicitation& e, int depth, const Settings& settings)
      : vars_(e.states), nb_(neighborhood(e, settings, 0x4C)), settings_(settings) {
    auto params = e.param_values();
    for (const auto& x : e.f) f_.push_back(simplify(substitute(x, params)));
    for (int j = 0; j < e.m(); ++j) ad_u_.push_back({column_of(e.g_u, j, params)});
    for (int j = 0; j < e.s(); ++j) ad_v_.push_back({column_of(e.g_v, j, params)});
    for (auto* family : {&ad_u_, &ad_v_})
      for (auto& seq : *family)
        while (static_cast<int>(seq.size()) < depth) seq.push_back(lie_bracket(f_, seq.back(), vars_));
  }

  const VectorField& f() const { return f_; }
  const std::vector<std::string>& vars() const { return vars_; }
  const Neighborhood& nb() const { return nb_; }
  const std::vector<VectorField>& u_field(int j) const { return ad_u_[static_cast<std::size_t>(j)]; }
  const std::vector<VectorField>& v_field(int j) const { return ad_v_[static_cast<std::size_t>(j)]; }

  // Empty string when h satisfies the annihilation conditions of a chain of length r.
  std::string test(const Expr& h, bool u_side, int r) {
    auto key = std::make_tuple(h.str(), u_side, r);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    std::string out = run_test(h, u_side, r);
    cache_[key] = out;
    return out;
  }

  std::vector<Expr> chain_rows(const Expr& h, int r) const {
    std::vector<Expr> rows{h};
    while (static_cast<int>(rows.size()) < r) rows.push_back(lie_derivative(rows.back(), f_, vars_));
    return rows;
  }

  bool independent(const std::vector<Expr>& rows) const {
    Eigen::MatrixXd j = jacobian(rows, vars_).evaluate(nb_.center());
    if (!j.allFinite()) return false;
    return numeric_rank(j, settings_.tol_rank, settings_.tol_zero) == static_cast<int>(rows.size());
  }

 private:
  std::string run_test(const Expr& h, bool u_side, int r) {
    auto zero = [&](const std::vector<std::vector<VectorField>>& family, int k, const std::string& label) {
      for (std::size_t j = 0; j < family.size(); ++j) {
        Expr pairing = lie_derivative(h, family[j][static_cast<std::size_t>(k)], vars_);
        ZeroTest z = is_zero(pairing, nb_);
        if (z.state == ZeroTest::State::Zero) continue;
        std::string what = z.state == ZeroTest::State::Unknown ? "cannot certify" : "nonzero";
        return what + " <dh, ad_f^" + std::to_string(k) + " " + label + std::to_string(j + 1) + ">";
      }
      return std::string();
    };
    auto nonzero = [&](const std::vector<std::vector<VectorField>>& family, int k, const std::string& label) {
      for (const auto& seq : family) {
        double v = evaluate(lie_derivative(h, seq[static_cast<std::size_t>(k)], vars_), nb_.center());
        if (std::isfinite(v) && std::abs(v) > settings_.tol_nonzero) return std::string();
      }
      return "<dh, ad_f^" + std::to_string(k) + " " + label + "> vanishes at the point";
    };
    for (int k = 0; k <= r - 2; ++k) {
      std::string s = zero(ad_u_, k, "g_u");
      if (s.empty()) s = zero(ad_v_, k, "g_v");
      if (!s.empty()) return s;
    }
    if (u_side) {
      std::string s = zero(ad_v_, r - 1, "g_v");
      if (s.empty()) s = nonzero(ad_u_, r - 1, "g_u");
      return s;
    }
    return nonzero(ad_v_, r - 1, "g_v");
  }

  std::vector<std::string> vars_;
  Neighborhood nb_;
  Settings settings_;
  VectorField f_;
  std::vector<std::vector<VectorField>> ad_u_, ad_v_;
  std::map<std::tuple<std::string, bool, int>, std::string> cache_;
};

std::string chain_name(bool u_side, int index, int length) {
  return std::string(u_side ? "u" : "v") + "-chain " + std::to_string(index + 1) + " (length " +
         std::to_string(length) + ")";
}

}  // namespace

ChainIndices chain_indices(const Distributions& dist, int n_star, int m_star, int s_star) {
  if (static_cast<int>(dist.D.levels.size()) < n_star || static_cast<int>(dist.D_hat.levels.size()) < n_star)
    throw Error(ErrorCode::Dimension, "distribution sequences are shorter than n*");
  std::vector<int> du, dv;
  int prev_d = 0;
  for (int i = 1; i <= n_star; ++i) {
    du.push_back(dist.D.at(i).rank - dist.D_hat.at(i).rank);
    dv.push_back(dist.D_hat.at(i).rank - prev_d);
    prev_d = dist.D.at(i).rank;
  }
  if (!non_increasing(du) || !non_increasing(dv) || std::any_of(du.begin(), du.end(), [](int x) { return x < 0; }) ||
      std::any_of(dv.begin(), dv.end(), [](int x) { return x < 0; })) {
    throw Error(ErrorCode::Certification,
                "rank jumps (" + join_ints(du) + ") and (" + join_ints(dv) + ") are not monotone");
  }
  ChainIndices idx;
  idx.rho = jumps_to_chains(du);
  idx.rho_bar = jumps_to_chains(dv);
  if (static_cast<int>(idx.rho.size()) != m_star || static_cast<int>(idx.rho_bar.size()) != s_star ||
      idx.size() != n_star) {
    throw Error(ErrorCode::Certification, "chain indices " + idx.str() + " are inconsistent with m* = " +
                                              std::to_string(m_star) + ", s* = " + std::to_string(s_star) +
                                              ", n* = " + std::to_string(n_star));
  }
  return idx;
}

CandidateSet parse_candidates(std::string_view text, const std::vector<std::string>& symbols,
                              const std::string& source) {
  SectionedText file(text, source);
  std::set<std::string> known(symbols.begin(), symbols.end());
  CandidateSet out;
  for (const auto& s : file.sections()) {
    std::vector<Expr>* target = nullptr;
    if (s.name == "candidates_u") target = &out.u;
    else if (s.name == "candidates_v") target = &out.v;
    else file.fail(ErrorCode::Schema, s.line, "unknown section [" + s.name + "]");
    for (const auto& line : s.lines) target->push_back(file.expression(line.text, line.number, known));
  }
  return out;
}

CandidateSet load_candidates(const std::string& path, const std::vector<std::string>& symbols) {
  return parse_candidates(read_file(path), symbols, path);
}

std::vector<Expr> heuristic_pool(const std::vector<std::string>& states) {
  std::vector<Expr> pool;
  const std::size_t n = states.size();
  auto x = [&](std::size_t i) { return Expr::symbol(states[i]); };
  for (std::size_t i = 0; i < n; ++i) pool.push_back(x(i));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      pool.push_back(x(i) + x(j));
      pool.push_back(x(i) - x(j));
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) pool.push_back(x(i) * x(j));
  if (pool.size() > kPoolLimit) pool.resize(kPoolLimit);
  return pool;
}

Explicitation brunovsky_explicitation(const ChainIndices& idx, const Point& point) {
  const int mu = static_cast<int>(idx.rho.size());
  const int s = static_cast<int>(idx.rho_bar.size());
  const int n = idx.size();
  Explicitation b;
  b.name = "brunovsky";
  b.states = canonical_states(idx);
  for (int j = 1; j <= mu; ++j) b.inputs.push_back("ut" + std::to_string(j));
  for (int j = 1; j <= s; ++j) b.drives.push_back("vt" + std::to_string(j));
  b.point = point;
  for (const auto& x : b.states)
    if (!b.point.has(x)) b.point.set(x, 0.0);
  b.f.assign(static_cast<std::size_t>(n), Expr(0));
  b.g_u = SymMatrix(n, mu);
  b.g_v = SymMatrix(n, s);
  b.l_u = SymMatrix(0, mu);
  int off = 0;
  auto chain = [&](int len, SymMatrix& g, int col) {
    for (int i = 0; i + 1 < len; ++i) b.f[static_cast<std::size_t>(off + i)] = Expr::symbol(b.states[static_cast<std::size_t>(off + i + 1)]);
    g(off + len - 1, col) = 1;
    off += len;
  };
  for (int j = 0; j < mu; ++j) chain(idx.rho[static_cast<std::size_t>(j)], b.g_u, j);
  for (int j = 0; j < s; ++j) chain(idx.rho_bar[static_cast<std::size_t>(j)], b.g_v, j);
  LinearDacs t = canonical_target(idx);
  b.has_provenance = true;
  b.Q = SymMatrix::identity(t.l());
  b.E1 = sym_from(t.E);
  b.E1_dagger = b.E1.transpose();
  return b;
}

Transform construct_transform(const Explicitation& e, const ChainIndices& idx, const CandidateSet& candidates,
                              const Settings& settings) {
  const int mu = static_cast<int>(idx.rho.size());
  const int s = static_cast<int>(idx.rho_bar.size());
  if (mu != e.m() || s != e.s() || idx.size() != e.n() || e.p() != 0) {
    throw Error(ErrorCode::Argument, "chain indices " + idx.str() + " do not fit the explicitation");
  }
  const bool automatic = mu <= 1 && s <= 1;
  auto params = e.param_values();
  auto prepare = [&](const std::vector<Expr>& given, bool needed, const char* side) {
    std::vector<Expr> out;
    if (!given.empty()) {
      for (const auto& c : given) out.push_back(simplify(substitute(c, params)));
    } else if (needed && automatic) {
      out = heuristic_pool(e.states);
    } else if (needed) {
      throw Error(ErrorCode::Certification,
                  std::string("construction needs user candidates for the ") + side + "-chains");
    }
    return sorted_unique(out);
  };
  Transform tr;
  tr.from_pool = (mu > 0 && candidates.u.empty()) || (s > 0 && candidates.v.empty());
  std::vector<Expr> cand_u = prepare(candidates.u, mu > 0, "u");
  std::vector<Expr> cand_v = prepare(candidates.v, s > 0, "v");

  int depth = 1;
  for (int r : idx.rho) depth = std::max(depth, r);
  for (int r : idx.rho_bar) depth = std::max(depth, r);
  ChainSearch search(e, depth, settings);

  struct Chain {
    bool u_side;
    int index;
    int length;
    std::vector<Expr> passing;
  };
  std::vector<Chain> chains;
  for (int j = 0; j < mu; ++j) chains.push_back({true, j, idx.rho[static_cast<std::size_t>(j)], {}});
  for (int j = 0; j < s; ++j) chains.push_back({false, j, idx.rho_bar[static_cast<std::size_t>(j)], {}});
  std::vector<std::string> failures;
  for (auto& c : chains) {
    std::vector<std::string> reasons;
    for (const auto& h : c.u_side ? cand_u : cand_v) {
      std::string why = search.test(h, c.u_side, c.length);
      if (why.empty()) c.passing.push_back(h);
      else reasons.push_back(h.str() + ": " + why);
    }
    if (c.passing.empty()) {
      std::string msg = chain_name(c.u_side, c.index, c.length) + " has no admissible candidate";
      for (std::size_t k = 0; k < reasons.size() && k < 8; ++k) msg += "\n  " + reasons[k];
      if (reasons.size() > 8) msg += "\n  ... " + std::to_string(reasons.size() - 8) + " more";
      failures.push_back(msg);
    }
  }
  if (!failures.empty()) {
    std::string msg = "construction needs user candidates:";
    for (const auto& f : failures) msg += "\n" + f;
    throw Error(ErrorCode::Certification, msg);
  }

  std::vector<Expr> chosen(chains.size());
  std::vector<std::vector<Expr>> rows(chains.size());
  int visited = 0;
  std::function<bool(std::size_t, std::vector<Expr>&)> dfs = [&](std::size_t k, std::vector<Expr>& stack) {
    if (k == chains.size()) return true;
    for (const auto& h : chains[k].passing) {
      if (++visited > kSearchLimit) return false;
      if (std::find(chosen.begin(), chosen.begin() + static_cast<long>(k), h) != chosen.begin() + static_cast<long>(k))
        continue;
      std::vector<Expr> r = search.chain_rows(h, chains[k].length);
      std::vector<Expr> next = stack;
      next.insert(next.end(), r.begin(), r.end());
      if (!search.independent(next)) continue;
      chosen[k] = h;
      rows[k] = r;
      if (dfs(k + 1, next)) return true;
    }
    return false;
  };
  std::vector<Expr> empty;
  if (!dfs(0, empty)) {
    throw Error(ErrorCode::Certification,
                "construction needs user candidates: no choice of admissible candidates gives an invertible "
                "Jacobian of psi at the point");
  }

  const auto& vars = search.vars();
  const auto& f = search.f();
  tr.b_u = SymMatrix(mu, mu);
  tr.b_v = SymMatrix(s, s);
  tr.lambda_t = SymMatrix(s, mu);
  for (std::size_t k = 0; k < chains.size(); ++k) {
    const Chain& c = chains[k];
    const Expr& top = rows[k].back();
    tr.psi.insert(tr.psi.end(), rows[k].begin(), rows[k].end());
    Expr a = lie_derivative(top, f, vars);
    if (c.u_side) {
      tr.h_u.push_back(chosen[k]);
      tr.a_u.push_back(a);
      for (int j = 0; j < mu; ++j) tr.b_u(c.index, j) = lie_derivative(top, search.u_field(j)[0], vars);
    } else {
      tr.h_v.push_back(chosen[k]);
      tr.a_v.push_back(a);
      for (int j = 0; j < s; ++j) tr.b_v(c.index, j) = lie_derivative(top, search.v_field(j)[0], vars);
      for (int j = 0; j < mu; ++j) tr.lambda_t(c.index, j) = lie_derivative(top, search.u_field(j)[0], vars);
    }
  }
  const Neighborhood& nb = search.nb();
  auto certify = [&](const SymMatrix& b, const char* what) {
    if (b.rows() == 0) return;
    Eigen::MatrixXd v = b.evaluate(nb.center());
    if (!v.allFinite() || numeric_rank(v, settings.tol_rank, settings.tol_zero) < b.rows())
      throw Error(ErrorCode::Singular, std::string(what) + " is singular at the point");
  };
  certify(tr.b_u, "b^u");
  certify(tr.b_v, "b^v");
  SymMatrix bu_inv = mu ? inverse(tr.b_u, nb).simplified() : SymMatrix(0, 0);
  SymMatrix bv_inv = s ? inverse(tr.b_v, nb).simplified() : SymMatrix(0, 0);
  SysFbWitness& w = tr.witness;
  w.psi = tr.psi;
  w.beta_u = bu_inv;
  w.alpha_u = (Expr(-1) * bu_inv * SymMatrix::column(tr.a_u)).simplified().col(0);
  w.beta_v = bv_inv;
  w.alpha_v = (Expr(-1) * bv_inv * SymMatrix::column(tr.a_v)).simplified().col(0);
  w.lambda = (Expr(-1) * bv_inv * tr.lambda_t).simplified();
  if (mu == 0) w.alpha_u.clear();
  if (s == 0) w.alpha_v.clear();
  w.gamma = SymMatrix(e.n(), 0);
  w.eta = SymMatrix(0, 0);

  Point image;
  std::vector<std::string> names = canonical_states(idx);
  for (std::size_t i = 0; i < names.size(); ++i) image.set(names[i], evaluate(tr.psi[i], nb.center()));
  Explicitation target = brunovsky_explicitation(idx, image);
  tr.verification = verify_sys_fb_equivalence(e, target, w, settings);
  return tr;
}

const char* mode_name(LinearizationMode m) { return m == LinearizationMode::Internal ? "internal" : "external"; }

namespace {

struct InternalContext {
  std::optional<Restriction> restriction;
  std::optional<Explicitation> expl;
};

std::string rank_list(const DistributionSequence& s) {
  std::vector<int> r;
  for (const auto& l : s.levels) r.push_back(l.rank);
  return s.name + " ranks (" + join_ints(r) + ")";
}

ConditionResult fl3(const Distributions& dist, int n_star) {
  ConditionResult c{"FL3", Verdict::Pass, ""};
  std::string unknown;
  for (int i = 1; i <= n_star - 1; ++i) {
    for (const DistributionSequence* seq : {&dist.D_hat, &dist.D}) {
      const DistributionLevel& lvl = seq->at(i);
      const auto& inv = lvl.involutive;
      if (inv.verdict == Involutivity::NotInvolutive && c.verdict != Verdict::Fail) {
        c.verdict = Verdict::Fail;
        c.evidence = seq->name + "_" + std::to_string(i) + " is not involutive: [" +
                     lvl.labels[static_cast<std::size_t>(inv.first)] + ", " +
                     lvl.labels[static_cast<std::size_t>(inv.second)] + "] leaves the distribution";
        if (!inv.detail.empty()) c.evidence += " (" + inv.detail + ")";
      } else if (inv.verdict == Involutivity::Unknown && unknown.empty()) {
        unknown = seq->name + "_" + std::to_string(i) + " involutivity cannot be certified";
        if (!inv.detail.empty()) unknown += " (" + inv.detail + ")";
      }
    }
  }
  if (c.verdict == Verdict::Pass && !unknown.empty()) {
    c.verdict = Verdict::Undecided;
    c.evidence = unknown;
  }
  if (c.verdict == Verdict::Pass)
    c.evidence = n_star > 1 ? "D_i and D^_i involutive for i = 1.." + std::to_string(n_star - 1) : "nothing to check";
  return c;
}

Verdict combined(const std::vector<ConditionResult>& cs) {
  Verdict v = Verdict::Pass;
  for (const auto& c : cs) v = combine(v, c.verdict);
  return v;
}

LinearizationReport run_internal(const Dacs& d, const Settings& settings, const CandidateSet& candidates,
                                 InternalContext& ctx) {
  LinearizationReport rep;
  rep.mode = LinearizationMode::Internal;
  rep.system = d.name;
  try {
    ReductionTrace t = reduce(d, settings);
    rep.reduction = format_trace(t, d);
    if (!t.admissible) {
      rep.conditions.push_back({"reduction", Verdict::Undecided, "working point is not admissible: " + t.diagnostic});
      rep.verdict = Verdict::Undecided;
      return rep;
    }
    CrResult cr = check_cr(d, t, settings);
    if (!cr.ok) {
      rep.conditions.push_back({"CR", Verdict::Undecided, "ranks of E TM* and E TM* + Im G are not constant on M*"});
      rep.verdict = Verdict::Undecided;
      return rep;
    }
    ctx.restriction = restrict_system(d, t, settings);
    const Restriction& r = *ctx.restriction;
    ctx.expl = explicitate(r.system, settings);
    const Explicitation& e = *ctx.expl;
    const int n_star = r.n_star;
    Distributions dist = build_sequences(e, n_star, settings);
    rep.distributions = dist.table();

    ConditionResult c1{"FL1", Verdict::Pass, rank_list(dist.D_hat) + ", " + rank_list(dist.D)};
    for (const DistributionSequence* seq : {&dist.D_hat, &dist.D})
      for (const auto& lvl : seq->levels)
        if (!lvl.constant && c1.verdict == Verdict::Pass) {
          c1.verdict = Verdict::Fail;
          c1.evidence = seq->name + "_" + std::to_string(lvl.index) + " does not have constant rank; " + c1.evidence;
        }
    const int rd = dist.D.at(n_star).rank, rh = dist.D_hat.at(n_star).rank;
    // Without driving variables D^_{i+1} = D_i and only D_{n*} is required.
    const bool drives = e.s() > 0;
    ConditionResult c2{"FL2", rd == n_star && (rh == n_star || !drives) ? Verdict::Pass : Verdict::Fail,
                       "rank D_" + std::to_string(n_star) + " = " + std::to_string(rd) + ", rank D^_" +
                           std::to_string(n_star) + " = " + std::to_string(rh) + ", n* = " + std::to_string(n_star)};
    if (!drives) c2.evidence += ", no driving variables";
    rep.conditions = {c1, c2, fl3(dist, n_star)};
    rep.verdict = combined(rep.conditions);
    if (rep.verdict != Verdict::Pass) return rep;

    ChainIndices idx = chain_indices(dist, n_star, r.m_star, e.s());
    rep.indices = idx;
    rep.target = canonical_target(idx);
    rep.target_states = canonical_states(idx);
    rep.target_inputs = canonical_inputs(idx, r.m_star);
    try {
      rep.transform = construct_transform(e, idx, candidates, settings);
    } catch (const Error& err) {
      rep.transform_error = err.what();
      rep.verdict = Verdict::Undecided;
      return rep;
    }
    if (rep.transform->verification.verdict != Verdict::Pass) {
      rep.transform_error = "transform does not verify against the Brunovsky form";
      rep.verdict = Verdict::Undecided;
      return rep;
    }
    Explicitation bexp = brunovsky_explicitation(idx, Point());
    Dacs target = rep.target_dacs();
    for (std::size_t i = 0; i < rep.target_states.size(); ++i) {
      double v = evaluate(rep.transform->psi[i], e.point);
      bexp.point.set(rep.target_states[i], v);
      target.point.set(rep.target_states[i], v);
    }
    rep.dacs_witness = ex_fb_from_sys_witness(e, bexp, rep.transform->witness, settings);
    rep.dacs_check = verify_ex_fb_equivalence(r.system, target, *rep.dacs_witness, settings);
    rep.linearizable = rep.dacs_check->verdict == Verdict::Pass;
    if (!rep.linearizable) {
      rep.transform_error = "DACS-level witness does not verify";
      rep.verdict = Verdict::Undecided;
    }
  } catch (const Error& err) {
    rep.conditions.push_back({"certification", Verdict::Undecided, err.what()});
    rep.verdict = Verdict::Undecided;
    rep.linearizable = false;
  }
  return rep;
}

// Lifts the internal witness to the full system when M* is the whole neighborhood.
ExFbWitness external_witness(const Dacs& d, const Restriction& r, const ExFbWitness& inner,
                             const Transform& tr, const Settings& settings) {
  const int l = d.l(), m = d.m(), rs = r.r_star;
  const int q = static_cast<int>(r.pinned_inputs.size());
  const int ms = r.m_star;
  Neighborhood nb = neighborhood(d, settings, 0x58);
  std::vector<int> kept, pinned;
  for (int j = 0; j < m; ++j) {
    const auto& u = d.inputs[static_cast<std::size_t>(j)];
    if (std::find(r.pinned_inputs.begin(), r.pinned_inputs.end(), u) != r.pinned_inputs.end()) pinned.push_back(j);
    else kept.push_back(j);
  }
  SymMatrix qg = (r.Q * d.G).simplified();
  SymMatrix p = SymMatrix::identity(l);
  if (q > 0) {
    SymMatrix inv = inverse(select_cols(qg.block(rs, 0, q, m), pinned), nb);
    SymMatrix top = Expr(-1) * select_cols(qg.block(0, 0, rs, m), pinned) * inv;
    for (int i = 0; i < rs; ++i)
      for (int j = 0; j < q; ++j) p(i, rs + j) = top(i, j);
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j) p(rs + i, rs + j) = inv(i, j);
  }
  SymMatrix outer = SymMatrix::identity(l);
  for (int i = 0; i < rs; ++i)
    for (int j = 0; j < rs; ++j) outer(i, j) = inner.Q(i, j);
  ExFbWitness w;
  w.Q = (outer * p * r.Q).simplified();
  w.psi = inner.psi;
  std::map<std::string, Expr> ustar;
  for (int k = 0; k < ms; ++k) ustar[r.kept_inputs[static_cast<std::size_t>(k)]] = tr.witness.alpha_u[static_cast<std::size_t>(k)];
  w.alpha_u.assign(static_cast<std::size_t>(m), Expr(0));
  w.beta_u = SymMatrix(m, m);
  for (int k = 0; k < ms; ++k) {
    const int row = kept[static_cast<std::size_t>(k)];
    w.alpha_u[static_cast<std::size_t>(row)] = tr.witness.alpha_u[static_cast<std::size_t>(k)];
    for (int j = 0; j < ms; ++j) w.beta_u(row, j) = tr.witness.beta_u(k, j);
  }
  for (int i = 0; i < q; ++i) {
    const int row = pinned[static_cast<std::size_t>(i)];
    const Expr& map = r.input_map.at(r.pinned_inputs[static_cast<std::size_t>(i)]);
    w.alpha_u[static_cast<std::size_t>(row)] = simplify(substitute(map, ustar));
    for (int j = 0; j < ms; ++j) {
      std::vector<Expr> terms;
      for (int k = 0; k < ms; ++k)
        terms.push_back(differentiate(map, r.kept_inputs[static_cast<std::size_t>(k)]) * tr.witness.beta_u(k, j));
      w.beta_u(row, j) = simplify(Expr::sum(terms));
    }
    w.beta_u(row, ms + i) = 1;
  }
  return w;
}

}  // namespace

LinearizationReport check_internal(const Dacs& d, const Settings& settings, const CandidateSet& candidates) {
  InternalContext ctx;
  return run_internal(d, settings, candidates, ctx);
}

LinearizationReport check_external(const Dacs& d, const Settings& settings, const CandidateSet& candidates) {
  LinearizationReport rep;
  rep.mode = LinearizationMode::External;
  rep.system = d.name;
  Neighborhood nb = neighborhood(d, settings, 0xEF);
  SymMatrix eg = hstack(d.E, d.G);
  RankInfo re = numeric_rank(d.E, nb);
  RankInfo reg = numeric_rank(eg, nb);
  RankInfo regf = numeric_rank(hstack(eg, SymMatrix::column(d.F)), nb);
  ConditionResult efl1{"EFL1", re.constant && reg.constant ? Verdict::Pass : Verdict::Fail,
                       "rank E = " + std::to_string(re.rank) + (re.constant ? " (constant)" : " (not constant)") +
                           ", rank [E,G] = " + std::to_string(reg.rank) +
                           (reg.constant ? " (constant)" : " (not constant)")};
  bool contained = regf.rank == reg.rank && regf.sample_ranks == reg.sample_ranks;
  ConditionResult efl2{"EFL2", contained ? Verdict::Pass : Verdict::Fail,
                       "rank [E,G] = " + std::to_string(reg.rank) + ", rank [E,G,F] = " + std::to_string(regf.rank) +
                           (contained ? ", F in Im E + Im G" : ", F not in Im E + Im G")};
  if (!contained && regf.rank == reg.rank) efl2.evidence += " at some sample points";

  InternalContext ctx;
  LinearizationReport in = run_internal(d, settings, candidates, ctx);
  ConditionResult efl3{"EFL3", combined(in.conditions), ""};
  for (const auto& c : in.conditions) efl3.evidence += (efl3.evidence.empty() ? "" : ", ") + c.name + " " + verdict_name(c.verdict);
  rep.conditions = {efl1, efl2, efl3};
  rep.conditions.insert(rep.conditions.end(), in.conditions.begin(), in.conditions.end());
  rep.reduction = in.reduction;
  rep.distributions = in.distributions;
  rep.indices = in.indices;
  rep.verdict = combine(combine(efl1.verdict, efl2.verdict), in.verdict);
  if (rep.verdict == Verdict::Fail || !in.indices) return rep;
  rep.transform = in.transform;
  rep.transform_error = in.transform_error;
  rep.target = canonical_target(*in.indices, d.m(), d.l());
  rep.target_states = canonical_states(*in.indices);
  rep.target_inputs = canonical_inputs(*in.indices, d.m());
  if (!in.linearizable || !in.dacs_witness || !ctx.restriction) return rep;
  try {
    const Restriction& r = *ctx.restriction;
    if (!r.eliminated_states.empty())
      throw Error(ErrorCode::Certification, "M* is a proper submanifold although EFL2 holds");
    rep.dacs_witness = external_witness(d, r, *in.dacs_witness, *in.transform, settings);
    Dacs target = rep.target_dacs();
    for (std::size_t i = 0; i < rep.target_states.size(); ++i)
      target.point.set(rep.target_states[i], evaluate(in.transform->psi[i], d.point));
    rep.dacs_check = verify_ex_fb_equivalence(d, target, *rep.dacs_witness, settings);
    rep.linearizable = rep.dacs_check->verdict == Verdict::Pass;
    if (!rep.linearizable) {
      rep.transform_error = "DACS-level witness does not verify";
      rep.verdict = Verdict::Undecided;
    }
  } catch (const Error& err) {
    rep.transform_error = err.what();
    rep.verdict = Verdict::Undecided;
  }
  return rep;
}

Dacs LinearizationReport::target_dacs() const {
  if (!target) throw Error(ErrorCode::Argument, "report has no target system");
  Dacs t = to_dacs(*target, target_states, target_inputs, system + "_linear");
  for (const auto& s : target_states)
    if (!t.point.has(s)) t.point.set(s, 0.0);
  return t;
}

std::string LinearizationReport::summary() const {
  const std::string kind = mode == LinearizationMode::External ? "externally" : "internally";
  if (verdict == Verdict::Pass && linearizable) return kind + " feedback linearizable, " + indices->str();
  if (verdict == Verdict::Fail) {
    std::string failed;
    for (const auto& c : conditions)
      if (c.verdict == Verdict::Fail) failed += (failed.empty() ? "" : ", ") + c.name;
    return "not " + kind + " feedback linearizable: " + failed + " fails";
  }
  return kind + " feedback linearizability undecided";
}

std::string LinearizationReport::text() const {
  std::ostringstream os;
  os << "system: " << system << "\nmode: " << mode_name(mode) << "\n";
  for (const auto& c : conditions) os << c.name << ": " << verdict_name(c.verdict) << ", " << c.evidence << "\n";
  if (!distributions.empty()) os << "distributions:\n" << distributions;
  if (indices) os << "indices: " << indices->str() << "\n";
  if (transform) {
    auto list = [&](const char* name, const std::vector<Expr>& v) {
      os << name << ":";
      for (const auto& x : v) os << " " << x.str() << ";";
      os << "\n";
    };
    list("h_u", transform->h_u);
    list("h_v", transform->h_v);
    list("psi", transform->psi);
    list("a_u", transform->a_u);
    os << "b_u: " << transform->b_u.str() << "\n";
    list("a_v", transform->a_v);
    os << "b_v: " << transform->b_v.str() << "\n";
    os << "lambda~: " << transform->lambda_t.str() << "\n";
    os << "transform check:\n" << transform->verification.text();
  }
  if (!transform_error.empty()) os << "transform: " << transform_error << "\n";
  if (dacs_check) os << "system-level check:\n" << dacs_check->text();
  if (target) os << "target:\n" << format_system(target_dacs());
  os << summary() << "\n";
  return os.str();
}

std::string LinearizationReport::document() const {
  using nlohmann::ordered_json;
  auto strings = [](const std::vector<Expr>& v) {
    ordered_json a = ordered_json::array();
    for (const auto& x : v) a.push_back(x.str());
    return a;
  };
  auto matrix = [&](const SymMatrix& m) {
    ordered_json a = ordered_json::array();
    for (int i = 0; i < m.rows(); ++i) a.push_back(strings(m.row(i)));
    return a;
  };
  ordered_json j;
  j["document"] = "dacsfl linearization report";
  j["system"] = system;
  j["mode"] = mode_name(mode);
  j["verdict"] = verdict_name(verdict);
  j["linearizable"] = linearizable;
  j["summary"] = summary();
  j["conditions"] = ordered_json::array();
  for (const auto& c : conditions)
    j["conditions"].push_back({{"name", c.name}, {"verdict", verdict_name(c.verdict)}, {"evidence", c.evidence}});
  if (indices) j["indices"] = {{"rho", indices->rho}, {"rho_bar", indices->rho_bar}};
  if (transform) {
    const Transform& t = *transform;
    j["transform"] = {{"h_u", strings(t.h_u)},   {"h_v", strings(t.h_v)},   {"psi", strings(t.psi)},
                      {"a_u", strings(t.a_u)},   {"b_u", matrix(t.b_u)},    {"a_v", strings(t.a_v)},
                      {"b_v", matrix(t.b_v)},    {"lambda_t", matrix(t.lambda_t)},
                      {"verification", verdict_name(t.verification.verdict)}};
  }
  if (!transform_error.empty()) j["transform_error"] = transform_error;
  if (dacs_witness) {
    j["witness"] = {{"Q", matrix(dacs_witness->Q)},
                    {"psi", strings(dacs_witness->psi)},
                    {"alpha_u", strings(dacs_witness->alpha_u)},
                    {"beta_u", matrix(dacs_witness->beta_u)},
                    {"verification", dacs_check ? verdict_name(dacs_check->verdict) : "UNDECIDED"}};
  }
  if (target) j["target"] = format_system(target_dacs());
  return j.dump(2) + "\n";
}

}  // namespace dacsfl
