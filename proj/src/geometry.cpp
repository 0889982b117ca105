// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#include "dacsfl/geometry.hpp"

#include <cmath>
#include <sstream>

namespace dacsfl {

namespace {

struct Generator {
  VectorField field;
  std::string label;
};

SymMatrix as_columns(const std::vector<VectorField>& gens, int n) {
  SymMatrix m(n, static_cast<int>(gens.size()));
  for (int j = 0; j < m.cols(); ++j)
    for (int i = 0; i < n; ++i) m(i, j) = gens[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
  return m;
}

Eigen::MatrixXd eval_columns(const std::vector<VectorField>& gens, int n, const Point& p) {
  return as_columns(gens, n).evaluate(p);
}

// Keeps the generators that raise the rank at the working point, in order.
std::vector<Generator> prune(const std::vector<Generator>& cand, int n, const Neighborhood& nb) {
  std::vector<Generator> kept;
  std::vector<VectorField> fields;
  const Settings& st = nb.settings();
  int current = 0;
  for (const auto& g : cand) {
    fields.push_back(g.field);
    Eigen::MatrixXd v = eval_columns(fields, n, nb.center());
    int r = v.allFinite() ? numeric_rank(v, st.tol_rank, st.tol_zero) : current;
    if (r > current) {
      kept.push_back(g);
      current = r;
    } else {
      fields.pop_back();
    }
  }
  return kept;
}

std::string ad_label(const std::string& label) {
  if (label.rfind("ad_f^", 0) == 0) {
    std::size_t sp = label.find(' ');
    int k = std::stoi(label.substr(5, sp - 5));
    return "ad_f^" + std::to_string(k + 1) + label.substr(sp);
  }
  if (label.rfind("ad_f ", 0) == 0) return "ad_f^2 " + label.substr(5);
  return "ad_f " + label;
}

DistributionLevel make_level(int index, const std::vector<Generator>& gens, const std::vector<std::string>& vars,
                             const Neighborhood& nb) {
  DistributionLevel lv;
  lv.index = index;
  for (const auto& g : gens) {
    lv.generators.push_back(g.field);
    lv.labels.push_back(g.label);
  }
  const int n = static_cast<int>(vars.size());
  if (gens.empty()) {
    lv.involutive.verdict = Involutivity::Involutive;
    return lv;
  }
  RankInfo ri = numeric_rank(as_columns(lv.generators, n), nb);
  lv.rank = ri.rank;
  lv.constant = ri.constant;
  lv.involutive = check_involutive(lv.generators, vars, nb);
  return lv;
}

}  // namespace

VectorField lie_bracket(const VectorField& f, const VectorField& g, const std::vector<std::string>& vars) {
  const std::size_t n = vars.size();
  if (f.size() != n || g.size() != n) throw Error(ErrorCode::Dimension, "vector fields must have one entry per state");
  VectorField out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Expr> terms;
    for (std::size_t j = 0; j < n; ++j) {
      if (!f[j].is_zero()) terms.push_back(differentiate(g[i], vars[j]) * f[j]);
      if (!g[j].is_zero()) terms.push_back(-(differentiate(f[i], vars[j]) * g[j]));
    }
    out[i] = simplify(Expr::sum(terms));
  }
  return out;
}

const char* involutivity_name(Involutivity v) {
  switch (v) {
    case Involutivity::Involutive: return "involutive";
    case Involutivity::NotInvolutive: return "not involutive";
    case Involutivity::Unknown: return "unknown";
  }
  return "?";
}

InvolutivityResult check_involutive(const std::vector<VectorField>& gens, const std::vector<std::string>& vars,
                                    const Neighborhood& nb) {
  InvolutivityResult res;
  const int n = static_cast<int>(vars.size());
  const Settings& st = nb.settings();
  RankInfo base = numeric_rank(as_columns(gens, n), nb);
  if (!base.constant) {
    res.detail = "distribution does not have constant rank";
    return res;
  }
  const int k = base.rank;
  if (gens.size() <= 1 || k == n) {
    res.verdict = Involutivity::Involutive;
    return res;
  }
  std::vector<const Point*> points{&nb.center()};
  int count = std::min<int>(st.rank_samples, static_cast<int>(nb.samples().size()));
  for (int s = 0; s < count; ++s) points.push_back(&nb.samples()[static_cast<std::size_t>(s)]);
  bool undecided = false;
  for (std::size_t a = 0; a < gens.size(); ++a) {
    for (std::size_t b = a + 1; b < gens.size(); ++b) {
      VectorField br = lie_bracket(gens[a], gens[b], vars);
      bool zero = true;
      for (const auto& x : br) zero = zero && x.is_zero();
      if (zero) continue;
      std::vector<VectorField> stacked = gens;
      stacked.push_back(br);
      SymMatrix m = as_columns(stacked, n);
      for (const Point* p : points) {
        Eigen::MatrixXd v = m.evaluate(*p);
        if (!v.allFinite()) {
          undecided = true;
          continue;
        }
        if (numeric_rank(v, st.tol_rank, st.tol_zero) > k) {
          res.verdict = Involutivity::NotInvolutive;
          res.first = static_cast<int>(a);
          res.second = static_cast<int>(b);
          res.bracket = br;
          res.detail = "bracket of generators " + std::to_string(a + 1) + " and " + std::to_string(b + 1) +
                       " leaves the distribution";
          return res;
        }
      }
    }
  }
  if (undecided) {
    res.detail = "bracket not evaluable at some samples";
    return res;
  }
  res.verdict = Involutivity::Involutive;
  return res;
}

Distributions build_sequences(const Explicitation& e, int n_star, const Settings& settings) {
  if (e.p() != 0) throw Error(ErrorCode::Argument, "distribution sequences need an explicitation without outputs");
  if (n_star < 1) throw Error(ErrorCode::Argument, "sequence length must be positive");
  Neighborhood nb = neighborhood(e, settings, 0x6E);
  const int n = e.n();
  std::map<std::string, Expr> params = e.param_values();
  VectorField f;
  for (const auto& x : e.f) f.push_back(simplify(substitute(x, params)));
  auto column = [&](const SymMatrix& m, int j) {
    VectorField v;
    for (int i = 0; i < n; ++i) v.push_back(simplify(substitute(m(i, j), params)));
    return v;
  };
  std::vector<Generator> d_gens, h_gens;
  for (int j = 0; j < e.m(); ++j) d_gens.push_back({column(e.g_u, j), "g_" + e.inputs[static_cast<std::size_t>(j)]});
  for (int j = 0; j < e.s(); ++j) {
    Generator g{column(e.g_v, j), "g_" + e.drives[static_cast<std::size_t>(j)]};
    d_gens.push_back(g);
    h_gens.push_back(g);
  }
  d_gens = prune(d_gens, n, nb);
  h_gens = prune(h_gens, n, nb);

  Distributions out;
  out.D.name = "D";
  out.D_hat.name = "D^";
  for (int i = 1; i <= n_star; ++i) {
    out.D.levels.push_back(make_level(i, d_gens, e.states, nb));
    out.D_hat.levels.push_back(make_level(i, h_gens, e.states, nb));
    if (i == n_star) break;
    std::vector<Generator> next_h = d_gens;
    for (const auto& g : h_gens) next_h.push_back({lie_bracket(f, g.field, e.states), ad_label(g.label)});
    std::vector<Generator> next_d = d_gens;
    for (const auto& g : d_gens) next_d.push_back({lie_bracket(f, g.field, e.states), ad_label(g.label)});
    h_gens = prune(next_h, n, nb);
    d_gens = prune(next_d, n, nb);
  }
  return out;
}

std::string Distributions::table() const {
  std::ostringstream os;
  auto row = [&](const DistributionSequence& s, const DistributionLevel& lv) {
    os << s.name << "_" << lv.index << ": rank " << lv.rank << (lv.constant ? "" : " (rank not constant)") << ", "
       << involutivity_name(lv.involutive.verdict) << ", span{";
    for (std::size_t k = 0; k < lv.labels.size(); ++k) os << (k ? ", " : "") << lv.labels[k];
    os << "}\n";
  };
  for (std::size_t i = 0; i < D.levels.size(); ++i) {
    row(D_hat, D_hat.levels[i]);
    row(D, D.levels[i]);
  }
  return os.str();
}

}  // namespace dacsfl
