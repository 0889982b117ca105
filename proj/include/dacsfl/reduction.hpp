// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#pragma once

#include <map>
#include <string>
#include <vector>

#include "dacsfl/dacs_model.hpp"

namespace dacsfl {

struct ReductionStep {
  int k = 0;
  std::vector<Expr> constraints;      // all constraints defining M_k
  std::vector<Expr> new_constraints;  // added at this step
  std::vector<Expr> discarded;        // candidates implied by earlier constraints
  int dim = 0;
  SymMatrix annihilator;              // W with W [E P, G] = 0 on M_{k-1}
};

struct ReductionTrace {
  std::vector<ReductionStep> steps;  // steps[0] is M_0
  int k_star = 0;
  bool admissible = true;
  bool fixed_point = false;
  std::string diagnostic;
  std::vector<Expr> constraints;
  // Eliminated state -> expression in the kept states (local parametrization of M*).
  std::map<std::string, Expr> elimination;
  std::vector<std::string> kept_states;
  std::vector<std::string> eliminated_states;
};

ReductionTrace reduce(const Dacs& d, const Settings& settings);

struct CrResult {
  bool ok = false;
  int r_star = 0;
  int m_star = 0;
  int n_star = 0;
  RankInfo rank_etm;     // dim E T M*
  RankInfo rank_etm_g;   // dim (E T M* + Im G)
};

CrResult check_cr(const Dacs& d, const ReductionTrace& t, const Settings& settings);

struct Restriction {
  Dacs system;  // E*, F*, G* over the kept states and inputs u*
  std::vector<std::string> kept_states;
  std::vector<std::string> eliminated_states;
  std::vector<Expr> constraints;
  std::map<std::string, Expr> embedding;  // every original state in terms of the kept states
  std::vector<std::string> kept_inputs;
  std::vector<std::string> pinned_inputs;
  std::map<std::string, Expr> input_map;  // every original input in terms of kept states and u*
  SymMatrix Q;
  int r_star = 0;
  int n_star = 0;
  int m_star = 0;
};

Restriction restrict_system(const Dacs& d, const ReductionTrace& t, const Settings& settings);

// Neighborhood on M* given by the trace parametrization.
Neighborhood manifold_neighborhood(const Dacs& d, const ReductionTrace& t, const Settings& settings,
                                   std::uint64_t salt = 0);

std::string format_trace(const ReductionTrace& t, const Dacs& d);

}  // namespace dacsfl
