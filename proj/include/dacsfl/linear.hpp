// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dacsfl/dacs_model.hpp"

namespace dacsfl {

// Chain lengths of the u-driven and v-driven Brunovsky blocks.
struct ChainIndices {
  std::vector<int> rho;
  std::vector<int> rho_bar;
  int size() const;  // |rho| + |rho_bar|
  std::string str() const;
};

// E = [I 0; 0 L_rhobar; 0 0; 0 0], H = [N_rho^T 0; 0 K_rhobar; 0 0; 0 0],
// L = [E_rho 0; 0 0; 0 I_{m-m*}; 0 0] with m* = len(rho) and l rows in total.
LinearDacs canonical_target(const ChainIndices& idx, int m, int l);
LinearDacs canonical_target(const ChainIndices& idx);

// State and input names of the canonical target: xi*, z*, ut*, wp*.
std::vector<std::string> canonical_states(const ChainIndices& idx);
std::vector<std::string> canonical_inputs(const ChainIndices& idx, int m);

struct WongSequences {
  std::vector<QMatrix> V;      // V_0 = R^n, V_{i+1} = H^-1(E V_i + Im L)
  std::vector<QMatrix> W;      // W_0 = 0, W_{i+1} = E^-1(H W_i + Im L)
  std::vector<QMatrix> W_hat;  // W^_1 = ker E, W^_{i+1} = E^-1(H W^_i + Im L); W_hat[0] holds W^_1
  QMatrix V_star;
  QMatrix W_star;
};

WongSequences wong_sequences(const LinearDacs& ld);

struct ControllabilityReport {
  bool controllable = false;     // V* cap W* = R^n
  int dim_intersection = 0;
  bool image_condition = false;  // Im E + Im H + Im L = Im E + Im L
  bool pencil_condition = false; // rank [lE - H, L] = rank [E, H, L] at all tested l
  bool rank_criterion = false;   // both of the above
  int pencil_points = 0;
  std::string evidence;
};

ControllabilityReport is_completely_controllable(const LinearDacs& ld, std::uint64_t seed = 1);

}  // namespace dacsfl
