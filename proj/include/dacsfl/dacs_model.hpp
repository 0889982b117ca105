// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dacsfl/qmatrix.hpp"
#include "dacsfl/symmat.hpp"

namespace dacsfl {

// E(x) x' = F(x) + G(x) u around a working point.
struct Dacs {
  std::string name;
  std::vector<std::string> states;
  std::vector<std::string> inputs;
  std::vector<std::pair<std::string, Rational>> params;
  Point point;  // binds states and params
  SymMatrix E;
  std::vector<Expr> F;
  SymMatrix G;

  int l() const { return E.rows(); }
  int n() const { return static_cast<int>(states.size()); }
  int m() const { return static_cast<int>(inputs.size()); }
  std::set<std::string> symbols() const;
  std::map<std::string, Expr> param_values() const;
  void validate() const;
};

Dacs parse_system(std::string_view text, const std::string& source = "<input>");
Dacs load_system(const std::string& path);
std::string format_system(const Dacs& d);

Neighborhood neighborhood(const Dacs& d, const Settings& settings, std::uint64_t salt = 0);

// Constant pencil E x' = H x + L u.
struct LinearDacs {
  QMatrix E;
  QMatrix H;
  QMatrix L;
  int l() const { return E.rows(); }
  int n() const { return E.cols(); }
  int m() const { return L.cols(); }
};

Dacs to_dacs(const LinearDacs& ld, const std::vector<std::string>& states = {},
             const std::vector<std::string>& inputs = {}, const std::string& name = "linear");
// Extracts (E, H, L) when E and G are constant and F is linear homogeneous in the states.
std::optional<LinearDacs> as_linear(const Dacs& d);

struct ExFbWitness {
  SymMatrix Q;
  std::vector<Expr> psi;
  std::vector<Expr> alpha_u;
  SymMatrix beta_u;
};

ExFbWitness parse_witness(std::string_view text, const Dacs& source, const std::string& where = "<witness>");
ExFbWitness load_witness(const std::string& path, const Dacs& source);
ExFbWitness identity_witness(const Dacs& d);

// One verified identity: residual matrix checked symbolically, then by sampling.
struct RelationCheck {
  std::string name;
  Verdict verdict = Verdict::Undecided;
  bool symbolic = false;
  double max_residual = 0.0;
  std::string detail;
};

RelationCheck check_identity(const std::string& name, const SymMatrix& residual, const Neighborhood& nb);

struct EquivalenceReport {
  Verdict verdict = Verdict::Undecided;
  std::vector<RelationCheck> relations;
  std::string text() const;
};

// Checks E~(psi) dpsi/dx = Q E, F~(psi) = Q (F + G alpha), G~(psi) = Q G beta.
EquivalenceReport verify_ex_fb_equivalence(const Dacs& a, const Dacs& b, const ExFbWitness& w,
                                           const Settings& settings);

// Damped Newton solve of map(x) = target starting from guess.
std::optional<std::vector<double>> invert_map(const std::vector<Expr>& map, const std::vector<std::string>& vars,
                                              const Point& fixed, const std::vector<double>& target,
                                              std::vector<double> guess, double tol = 1e-10);

}  // namespace dacsfl
