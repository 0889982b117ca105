// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#pragma once

#include <string>
#include <vector>

#include "dacsfl/explicitation.hpp"

namespace dacsfl {

using VectorField = std::vector<Expr>;

// [f, g] = (dg/dx) f - (df/dx) g
VectorField lie_bracket(const VectorField& f, const VectorField& g, const std::vector<std::string>& vars);

enum class Involutivity { Involutive, NotInvolutive, Unknown };

const char* involutivity_name(Involutivity v);

struct InvolutivityResult {
  Involutivity verdict = Involutivity::Unknown;
  int first = -1;  // generator pair whose bracket escapes
  int second = -1;
  VectorField bracket;
  std::string detail;
};

InvolutivityResult check_involutive(const std::vector<VectorField>& gens, const std::vector<std::string>& vars,
                                    const Neighborhood& nb);

struct DistributionLevel {
  int index = 0;
  std::vector<VectorField> generators;
  std::vector<std::string> labels;
  int rank = 0;
  bool constant = true;
  InvolutivityResult involutive;
};

struct DistributionSequence {
  std::string name;
  std::vector<DistributionLevel> levels;  // levels[i - 1] holds index i
  const DistributionLevel& at(int i) const { return levels.at(static_cast<std::size_t>(i - 1)); }
};

struct Distributions {
  DistributionSequence D;
  DistributionSequence D_hat;
  std::string table() const;
};

// D_1 = span{g_u, g_v}, D_{i+1} = D_i + [f, D_i];
// D^_1 = span{g_v}, D^_{i+1} = D_i + [f, D^_i].
Distributions build_sequences(const Explicitation& e, int n_star, const Settings& settings);

}  // namespace dacsfl
