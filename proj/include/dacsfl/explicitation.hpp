// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#pragma once

#include <string>
#include <vector>

#include "dacsfl/dacs_model.hpp"

namespace dacsfl {

// x' = f + g_u u + g_v v,  y = h + l_u u, with the witness that produced it.
struct Explicitation {
  std::string name;
  std::vector<std::string> states;
  std::vector<std::string> inputs;
  std::vector<std::string> drives;
  std::vector<std::pair<std::string, Rational>> params;
  Point point;
  std::vector<Expr> f;
  SymMatrix g_u;
  SymMatrix g_v;
  std::vector<Expr> h;
  SymMatrix l_u;

  // Provenance: Q E = [E1; 0], E1 E1_dagger = I, Im g_v = ker E1.
  bool has_provenance = false;
  SymMatrix Q;
  SymMatrix E1;
  SymMatrix E1_dagger;

  int n() const { return static_cast<int>(states.size()); }
  int m() const { return static_cast<int>(inputs.size()); }
  int s() const { return g_v.cols(); }
  int p() const { return static_cast<int>(h.size()); }
  std::map<std::string, Expr> param_values() const;
};

struct ExplicitationOptions {
  PivotPolicy pivots;
  // Left-multiplies Q by a random constant block upper-triangular matrix
  // and scales the kernel basis by a random constant invertible matrix.
  bool randomize = false;
  std::uint64_t seed = 0;
};

Explicitation explicitate(const Dacs& d, const Settings& settings, const ExplicitationOptions& options = {});

std::string format_explicitation(const Explicitation& e);
Explicitation parse_explicitation(std::string_view text, const std::string& source = "<input>");

struct SysFbWitness {
  std::vector<Expr> psi;
  std::vector<Expr> alpha_u;
  SymMatrix beta_u;
  std::vector<Expr> alpha_v;
  SymMatrix beta_v;
  SymMatrix lambda;
  SymMatrix gamma;
  SymMatrix eta;
};

SysFbWitness identity_sys_witness(const Explicitation& e);

EquivalenceReport verify_sys_fb_equivalence(const Explicitation& a, const Explicitation& b, const SysFbWitness& w,
                                            const Settings& settings);

// Witness relating two explicitations of DACSs that are ex-fb-equivalent via w
// (an identity witness gives the explicitation-class witness).
SysFbWitness sys_witness_from_ex_fb(const Explicitation& a, const Explicitation& b, const ExFbWitness& w,
                                    const Settings& settings);
SysFbWitness class_witness(const Explicitation& a, const Explicitation& b, const Settings& settings);

// DACS-level witness assembled from a sys-fb witness between explicitations.
ExFbWitness ex_fb_from_sys_witness(const Explicitation& a, const Explicitation& b, const SysFbWitness& w,
                                   const Settings& settings);

Neighborhood neighborhood(const Explicitation& e, const Settings& settings, std::uint64_t salt = 0);

}  // namespace dacsfl
