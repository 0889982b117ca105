// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#pragma once

#include <string>
#include <vector>

#include "dacsfl/explicitation.hpp"
#include "dacsfl/reduction.hpp"

namespace dacsfl {

struct Trajectory {
  std::vector<double> t;  // uniform grid
  std::vector<std::string> states;
  std::vector<std::string> inputs;
  std::vector<std::string> drives;
  std::vector<std::vector<double>> x;  // x[k] at t[k]
  std::vector<std::vector<double>> u;
  std::vector<std::vector<double>> v;
  double truncation_estimate = 0.0;  // max deviation from the half-step run
  bool truncation_flag = false;      // estimate above 1e-5

  std::size_t size() const { return t.size(); }
  double step() const { return t.size() > 1 ? t[1] - t[0] : 0.0; }
};

struct SimOptions {
  double t_end = 0.5;
  double step = 1e-4;
  bool monitor_truncation = true;
  double truncation_tol = 1e-5;
  double blowup = 1e6;
};

SimOptions sim_options(const Settings& settings);

// Fixed-step RK4 on x' = f + g_u u + g_v v.  Input signals are expressions in
// the reserved variable t, the states and the parameters.
Trajectory simulate_explicitation(const Explicitation& e, const Point& x0, const std::vector<Expr>& u_signal,
                                  const std::vector<Expr>& v_signal, const SimOptions& options);

// max over interior grid points of |E x' - F - G u|_inf, x' by 4th-order central differences.
double dacs_residual(const Dacs& d, const Trajectory& tr);

// Restriction trajectory expressed in the original states and inputs.
Trajectory lift_to_system(const Trajectory& tr, const Restriction& r, const Dacs& d);

// Max over t of the constraint values along a trajectory of d.
double constraint_drift(const Trajectory& tr, const std::vector<Expr>& constraints, const Dacs& d);

struct Correspondence {
  double state_deviation = 0.0;  // max |psi(x_a) - x_b|_inf
  double input_residual = 0.0;   // max residual of the feedback relations
};

Correspondence correspondence_check(const Trajectory& a, const Trajectory& b, const SysFbWitness& w,
                                    const std::vector<std::pair<std::string, Rational>>& params = {});
Correspondence correspondence_check(const Trajectory& a, const Trajectory& b, const ExFbWitness& w,
                                    const std::vector<std::pair<std::string, Rational>>& params = {});

struct MatchedRun {
  Trajectory source;
  Trajectory target;
  Correspondence correspondence;
};

// Drives b with signals u~(t), v~(t) from psi(x0) and a with the feedback
// u = alpha_u + beta_u u~, v = alpha_v + lambda u + beta_v v~ from x0.
MatchedRun simulate_matched(const Explicitation& a, const Explicitation& b, const SysFbWitness& w, const Point& x0,
                            const std::vector<Expr>& u_target, const std::vector<Expr>& v_target,
                            const SimOptions& options);

// CSV with header t, states..., inputs..., drives...
std::string trajectory_csv(const Trajectory& tr);

}  // namespace dacsfl
