// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#include "dacsfl/verify_sim.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

namespace dacsfl {

namespace {

std::map<std::string, Expr> param_map(const std::vector<std::pair<std::string, Rational>>& params) {
  std::map<std::string, Expr> m;
  for (const auto& [k, v] : params) m[k] = Expr(v);
  return m;
}

std::vector<Compiled> compile_all(const std::vector<Expr>& es, const std::map<std::string, Expr>& params,
                                  const std::vector<std::string>& slots) {
  std::vector<Compiled> out;
  for (const auto& e : es) out.emplace_back(simplify(substitute(e, params)), slots);
  return out;
}

std::vector<Expr> flatten(const SymMatrix& m) {
  std::vector<Expr> out;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  return out;
}

std::string time_text(double t) {
  std::ostringstream os;
  os << t;
  return os.str();
}

int index_of(const std::vector<std::string>& names, const std::string& n, const char* what) {
  auto it = std::find(names.begin(), names.end(), n);
  if (it == names.end()) throw Error(ErrorCode::Argument, std::string("trajectory has no ") + what + " '" + n + "'");
  return static_cast<int>(it - names.begin());
}

// Values of trajectory point k ordered by `names`.
std::vector<double> pick(std::size_t k, const std::vector<std::string>& names,
                         const std::vector<std::string>& pool, const std::vector<std::vector<double>>& data,
                         const char* what) {
  std::vector<double> out;
  for (const auto& n : names) out.push_back(data[k][static_cast<std::size_t>(index_of(pool, n, what))]);
  return out;
}

class ExplicitationRhs {
 public:
  ExplicitationRhs(const Explicitation& e, const std::vector<Expr>& u_signal, const std::vector<Expr>& v_signal)
      : n_(e.n()), m_(e.m()), s_(e.s()) {
    if (static_cast<int>(u_signal.size()) != m_ || static_cast<int>(v_signal.size()) != s_)
      throw Error(ErrorCode::Dimension, "input signals do not match the explicitation");
    std::vector<std::string> slots{"t"};
    slots.insert(slots.end(), e.states.begin(), e.states.end());
    auto params = e.param_values();
    f_ = compile_all(e.f, params, slots);
    gu_ = compile_all(flatten(e.g_u), params, slots);
    gv_ = compile_all(flatten(e.g_v), params, slots);
    us_ = compile_all(u_signal, params, slots);
    vs_ = compile_all(v_signal, params, slots);
    buf_.resize(static_cast<std::size_t>(n_) + 1);
  }

  void inputs(double t, const std::vector<double>& x, std::vector<double>& u, std::vector<double>& v) {
    load(t, x);
    u.resize(static_cast<std::size_t>(m_));
    v.resize(static_cast<std::size_t>(s_));
    for (int j = 0; j < m_; ++j) u[static_cast<std::size_t>(j)] = us_[static_cast<std::size_t>(j)](buf_.data());
    for (int j = 0; j < s_; ++j) v[static_cast<std::size_t>(j)] = vs_[static_cast<std::size_t>(j)](buf_.data());
  }

  std::vector<double> operator()(double t, const std::vector<double>& x) {
    inputs(t, x, u_, v_);
    std::vector<double> dx(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) {
      double r = f_[static_cast<std::size_t>(i)](buf_.data());
      for (int j = 0; j < m_; ++j) r += gu_[static_cast<std::size_t>(i * m_ + j)](buf_.data()) * u_[static_cast<std::size_t>(j)];
      for (int j = 0; j < s_; ++j) r += gv_[static_cast<std::size_t>(i * s_ + j)](buf_.data()) * v_[static_cast<std::size_t>(j)];
      if (!std::isfinite(r)) throw Error(ErrorCode::Numerical, "singularity hit at t = " + time_text(t));
      dx[static_cast<std::size_t>(i)] = r;
    }
    return dx;
  }

 private:
  void load(double t, const std::vector<double>& x) {
    buf_[0] = t;
    std::copy(x.begin(), x.end(), buf_.begin() + 1);
  }

  int n_, m_, s_;
  std::vector<Compiled> f_, gu_, gv_, us_, vs_;
  std::vector<double> buf_, u_, v_;
};

std::vector<std::vector<double>> integrate(ExplicitationRhs& rhs, std::vector<double> x, int steps, double h,
                                           double blowup) {
  std::vector<std::vector<double>> out{x};
  const std::size_t n = x.size();
  auto axpy = [&](const std::vector<double>& a, const std::vector<double>& b, double s) {
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = a[i] + s * b[i];
    return r;
  };
  for (int k = 0; k < steps; ++k) {
    const double t = k * h;
    auto k1 = rhs(t, x);
    auto k2 = rhs(t + h / 2, axpy(x, k1, h / 2));
    auto k3 = rhs(t + h / 2, axpy(x, k2, h / 2));
    auto k4 = rhs(t + h, axpy(x, k3, h));
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
      if (!std::isfinite(x[i])) throw Error(ErrorCode::Numerical, "singularity hit at t = " + time_text(t + h));
      norm = std::max(norm, std::abs(x[i]));
    }
    if (norm > blowup) throw Error(ErrorCode::Numerical, "blow-up at t = " + time_text(t + h));
    out.push_back(x);
  }
  return out;
}

}  // namespace

SimOptions sim_options(const Settings& settings) {
  SimOptions o;
  o.t_end = settings.horizon;
  o.step = settings.step;
  return o;
}

Trajectory simulate_explicitation(const Explicitation& e, const Point& x0, const std::vector<Expr>& u_signal,
                                  const std::vector<Expr>& v_signal, const SimOptions& options) {
  if (!(options.step > 0) || !(options.t_end >= 0))
    throw Error(ErrorCode::Argument, "step must be positive and the horizon non-negative");
  const int steps = static_cast<int>(std::llround(options.t_end / options.step));
  ExplicitationRhs rhs(e, u_signal, v_signal);
  std::vector<double> start;
  for (const auto& s : e.states) {
    if (!x0.has(s)) throw Error(ErrorCode::Argument, "initial point does not bind '" + s + "'");
    start.push_back(x0.at(s));
  }
  Trajectory tr;
  tr.states = e.states;
  tr.inputs = e.inputs;
  tr.drives = e.drives;
  tr.x = integrate(rhs, start, steps, options.step, options.blowup);
  for (int k = 0; k <= steps; ++k) {
    const double t = k * options.step;
    tr.t.push_back(t);
    std::vector<double> u, v;
    rhs.inputs(t, tr.x[static_cast<std::size_t>(k)], u, v);
    tr.u.push_back(u);
    tr.v.push_back(v);
  }
  if (options.monitor_truncation && steps > 0) {
    auto fine = integrate(rhs, start, 2 * steps, options.step / 2, options.blowup);
    for (int k = 0; k <= steps; ++k)
      for (std::size_t i = 0; i < start.size(); ++i)
        tr.truncation_estimate = std::max(tr.truncation_estimate,
                                          std::abs(fine[static_cast<std::size_t>(2 * k)][i] - tr.x[static_cast<std::size_t>(k)][i]));
    tr.truncation_flag = tr.truncation_estimate > options.truncation_tol;
  }
  return tr;
}

double dacs_residual(const Dacs& d, const Trajectory& tr) {
  if (tr.size() < 5) throw Error(ErrorCode::Argument, "trajectory too short for the differentiation stencil");
  auto params = d.param_values();
  std::vector<std::string> slots = d.states;
  slots.insert(slots.end(), d.inputs.begin(), d.inputs.end());
  auto e = compile_all(flatten(d.E), params, slots);
  auto f = compile_all(d.F, params, slots);
  auto g = compile_all(flatten(d.G), params, slots);
  const int l = d.l(), n = d.n(), m = d.m();
  std::vector<int> xi, ui;
  for (const auto& s : d.states) xi.push_back(index_of(tr.states, s, "state"));
  for (const auto& s : d.inputs) ui.push_back(index_of(tr.inputs, s, "input"));
  const double h = tr.step();
  double worst = 0.0;
  std::vector<double> buf(slots.size()), xdot(static_cast<std::size_t>(n));
  for (std::size_t k = 2; k + 2 < tr.size(); ++k) {
    for (int i = 0; i < n; ++i) {
      const std::size_t c = static_cast<std::size_t>(xi[static_cast<std::size_t>(i)]);
      buf[static_cast<std::size_t>(i)] = tr.x[k][c];
      xdot[static_cast<std::size_t>(i)] =
          (-tr.x[k + 2][c] + 8 * tr.x[k + 1][c] - 8 * tr.x[k - 1][c] + tr.x[k - 2][c]) / (12 * h);
    }
    for (int j = 0; j < m; ++j)
      buf[static_cast<std::size_t>(n + j)] = tr.u[k][static_cast<std::size_t>(ui[static_cast<std::size_t>(j)])];
    for (int r = 0; r < l; ++r) {
      double res = -f[static_cast<std::size_t>(r)](buf.data());
      for (int i = 0; i < n; ++i) res += e[static_cast<std::size_t>(r * n + i)](buf.data()) * xdot[static_cast<std::size_t>(i)];
      for (int j = 0; j < m; ++j)
        res -= g[static_cast<std::size_t>(r * m + j)](buf.data()) * buf[static_cast<std::size_t>(n + j)];
      worst = std::max(worst, std::isfinite(res) ? std::abs(res) : INFINITY);
    }
  }
  return worst;
}

Trajectory lift_to_system(const Trajectory& tr, const Restriction& r, const Dacs& d) {
  auto params = d.param_values();
  std::vector<std::string> slots = r.kept_states;
  slots.insert(slots.end(), r.kept_inputs.begin(), r.kept_inputs.end());
  std::vector<Expr> states, inputs;
  for (const auto& s : d.states) states.push_back(r.embedding.at(s));
  for (const auto& u : d.inputs) inputs.push_back(r.input_map.at(u));
  auto cs = compile_all(states, params, slots);
  auto ci = compile_all(inputs, params, slots);
  Trajectory out;
  out.t = tr.t;
  out.states = d.states;
  out.inputs = d.inputs;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    std::vector<double> buf = pick(k, r.kept_states, tr.states, tr.x, "state");
    auto u = pick(k, r.kept_inputs, tr.inputs, tr.u, "input");
    buf.insert(buf.end(), u.begin(), u.end());
    std::vector<double> x, w;
    for (const auto& c : cs) x.push_back(c(buf.data()));
    for (const auto& c : ci) w.push_back(c(buf.data()));
    out.x.push_back(x);
    out.u.push_back(w);
    out.v.emplace_back();
  }
  return out;
}

double constraint_drift(const Trajectory& tr, const std::vector<Expr>& constraints, const Dacs& d) {
  auto cs = compile_all(constraints, d.param_values(), d.states);
  double worst = 0.0;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    auto x = pick(k, d.states, tr.states, tr.x, "state");
    for (const auto& c : cs) worst = std::max(worst, std::abs(c(x.data())));
  }
  return worst;
}

namespace {

struct FeedbackMap {
  std::vector<Compiled> psi, alpha_u, beta_u, alpha_v, lambda, beta_v;
};

Correspondence compare(const Trajectory& a, const Trajectory& b, const FeedbackMap& fm, bool drives) {
  if (a.size() != b.size()) throw Error(ErrorCode::Argument, "trajectories have different grids");
  if (fm.psi.size() != b.states.size()) throw Error(ErrorCode::Dimension, "psi does not match the target states");
  Correspondence c;
  const std::size_t m = b.inputs.size(), s = drives ? b.drives.size() : 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::abs(a.t[k] - b.t[k]) > 1e-12) throw Error(ErrorCode::Argument, "trajectories have different grids");
    const double* x = a.x[k].data();
    for (std::size_t i = 0; i < fm.psi.size(); ++i)
      c.state_deviation = std::max(c.state_deviation, std::abs(fm.psi[i](x) - b.x[k][i]));
    for (std::size_t i = 0; i < a.inputs.size(); ++i) {
      double expect = fm.alpha_u[i](x);
      for (std::size_t j = 0; j < m; ++j) expect += fm.beta_u[i * m + j](x) * b.u[k][j];
      c.input_residual = std::max(c.input_residual, std::abs(a.u[k][i] - expect));
    }
    for (std::size_t i = 0; i < s; ++i) {
      double expect = fm.alpha_v[i](x);
      for (std::size_t j = 0; j < a.inputs.size(); ++j) expect += fm.lambda[i * a.inputs.size() + j](x) * a.u[k][j];
      for (std::size_t j = 0; j < s; ++j) expect += fm.beta_v[i * s + j](x) * b.v[k][j];
      c.input_residual = std::max(c.input_residual, std::abs(a.v[k][i] - expect));
    }
  }
  return c;
}

}  // namespace

Correspondence correspondence_check(const Trajectory& a, const Trajectory& b, const SysFbWitness& w,
                                    const std::vector<std::pair<std::string, Rational>>& params) {
  auto p = param_map(params);
  FeedbackMap fm{compile_all(w.psi, p, a.states),           compile_all(w.alpha_u, p, a.states),
                 compile_all(flatten(w.beta_u), p, a.states), compile_all(w.alpha_v, p, a.states),
                 compile_all(flatten(w.lambda), p, a.states), compile_all(flatten(w.beta_v), p, a.states)};
  return compare(a, b, fm, true);
}

Correspondence correspondence_check(const Trajectory& a, const Trajectory& b, const ExFbWitness& w,
                                    const std::vector<std::pair<std::string, Rational>>& params) {
  auto p = param_map(params);
  FeedbackMap fm;
  fm.psi = compile_all(w.psi, p, a.states);
  fm.alpha_u = compile_all(w.alpha_u, p, a.states);
  fm.beta_u = compile_all(flatten(w.beta_u), p, a.states);
  return compare(a, b, fm, false);
}

MatchedRun simulate_matched(const Explicitation& a, const Explicitation& b, const SysFbWitness& w, const Point& x0,
                            const std::vector<Expr>& u_target, const std::vector<Expr>& v_target,
                            const SimOptions& options) {
  if (u_target.size() != w.alpha_u.size() || v_target.size() != w.alpha_v.size())
    throw Error(ErrorCode::Dimension, "target signals do not match the witness");
  auto params = a.param_values();
  std::vector<Expr> u_src, v_src;
  for (std::size_t i = 0; i < w.alpha_u.size(); ++i) {
    std::vector<Expr> terms{w.alpha_u[i]};
    for (std::size_t j = 0; j < u_target.size(); ++j) terms.push_back(w.beta_u(static_cast<int>(i), static_cast<int>(j)) * u_target[j]);
    u_src.push_back(simplify(substitute(Expr::sum(terms), params)));
  }
  for (std::size_t i = 0; i < w.alpha_v.size(); ++i) {
    std::vector<Expr> terms{w.alpha_v[i]};
    for (std::size_t j = 0; j < u_src.size(); ++j) terms.push_back(w.lambda(static_cast<int>(i), static_cast<int>(j)) * u_src[j]);
    for (std::size_t j = 0; j < v_target.size(); ++j) terms.push_back(w.beta_v(static_cast<int>(i), static_cast<int>(j)) * v_target[j]);
    v_src.push_back(simplify(substitute(Expr::sum(terms), params)));
  }
  Point full = x0;
  for (const auto& [k, v] : a.params) full.set(k, v.get_d());
  Point y0;
  for (std::size_t i = 0; i < b.states.size(); ++i) y0.set(b.states[i], evaluate(w.psi[i], full));
  MatchedRun run;
  run.source = simulate_explicitation(a, x0, u_src, v_src, options);
  run.target = simulate_explicitation(b, y0, u_target, v_target, options);
  run.correspondence = correspondence_check(run.source, run.target, w, a.params);
  return run;
}

std::string trajectory_csv(const Trajectory& tr) {
  std::ostringstream os;
  os << "t";
  for (const auto* names : {&tr.states, &tr.inputs, &tr.drives})
    for (const auto& n : *names) os << "," << n;
  os << "\n" << std::setprecision(17);
  for (std::size_t k = 0; k < tr.size(); ++k) {
    os << tr.t[k];
    for (double x : tr.x[k]) os << "," << x + 0.0;
    for (double x : tr.u[k]) os << "," << x + 0.0;
    if (k < tr.v.size())
      for (double x : tr.v[k]) os << "," << x + 0.0;
    os << "\n";
  }
  return os.str();
}

}  // namespace dacsfl
