// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dacsfl/explicitation.hpp"
#include "dacsfl/geometry.hpp"
#include "dacsfl/linear.hpp"
#include "dacsfl/reduction.hpp"

namespace dacsfl {

// Multi-indices from the per-level rank jumps of D and D^.
ChainIndices chain_indices(const Distributions& dist, int n_star, int m_star, int s_star);

struct CandidateSet {
  std::vector<Expr> u;
  std::vector<Expr> v;
};

CandidateSet parse_candidates(std::string_view text, const std::vector<std::string>& symbols,
                              const std::string& source = "<candidates>");
CandidateSet load_candidates(const std::string& path, const std::vector<std::string>& symbols);

// Coordinates, pairwise sums, differences and products, at most 500 entries.
std::vector<Expr> heuristic_pool(const std::vector<std::string>& states);

struct Transform {
  std::vector<Expr> h_u;  // one output per u-chain
  std::vector<Expr> h_v;  // one output per v-chain
  std::vector<Expr> psi;
  std::vector<Expr> a_u;
  SymMatrix b_u;
  std::vector<Expr> a_v;
  SymMatrix b_v;
  SymMatrix lambda_t;
  SysFbWitness witness;
  EquivalenceReport verification;
  bool from_pool = false;
};

// Brunovsky explicitation with the chains of idx, states xi*, z*, inputs ut*, drives vt*.
Explicitation brunovsky_explicitation(const ChainIndices& idx, const Point& point);

// Throws Error(Certification) listing the failed conditions when no assignment works.
Transform construct_transform(const Explicitation& e, const ChainIndices& idx, const CandidateSet& candidates,
                              const Settings& settings);

enum class LinearizationMode { Internal, External };

const char* mode_name(LinearizationMode m);

struct ConditionResult {
  std::string name;
  Verdict verdict = Verdict::Undecided;
  std::string evidence;
};

struct LinearizationReport {
  LinearizationMode mode = LinearizationMode::Internal;
  std::string system;
  Verdict verdict = Verdict::Undecided;
  std::vector<ConditionResult> conditions;
  std::string reduction;
  std::string distributions;
  std::optional<ChainIndices> indices;
  std::optional<Transform> transform;
  std::string transform_error;
  std::optional<LinearDacs> target;
  std::vector<std::string> target_states;
  std::vector<std::string> target_inputs;
  std::optional<ExFbWitness> dacs_witness;
  std::optional<EquivalenceReport> dacs_check;
  bool linearizable = false;

  std::string summary() const;
  std::string text() const;
  // Machine-readable JSON document; the target is embedded in the system file format.
  std::string document() const;
  Dacs target_dacs() const;
};

LinearizationReport check_internal(const Dacs& d, const Settings& settings, const CandidateSet& candidates = {});
LinearizationReport check_external(const Dacs& d, const Settings& settings, const CandidateSet& candidates = {});

}  // namespace dacsfl
