// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dacsfl/common.hpp"
#include "dacsfl/expr.hpp"

namespace dacsfl {

// Deterministic sample cloud around a working point.  Only the free
// variables are perturbed; eliminated variables are recomputed from their
// defining expressions so that samples stay on the corresponding manifold.
class Neighborhood {
 public:
  Neighborhood(Point center, std::vector<std::string> free, const Settings& settings, std::uint64_t salt = 0,
               std::map<std::string, Expr> eliminated = {});

  const Point& center() const { return center_; }
  const std::vector<Point>& samples() const { return samples_; }
  const std::vector<std::string>& free() const { return free_; }
  const std::map<std::string, Expr>& eliminated() const { return eliminated_; }
  const Settings& settings() const { return settings_; }

  // Slot layout shared by center and samples.
  const std::vector<std::string>& slots() const { return slots_; }
  std::vector<double> slot_values(const Point& p) const;

 private:
  Point center_;
  std::vector<std::string> free_;
  std::map<std::string, Expr> eliminated_;
  Settings settings_;
  std::vector<Point> samples_;
  std::vector<std::string> slots_;
};

struct ZeroTest {
  enum class State { Zero, NonzeroAt, Unknown };
  State state = State::Unknown;
  bool numeric = false;  // Zero established by sampling only
  Point witness;
  double value = 0.0;
};

ZeroTest is_zero(const Expr& e, const Neighborhood& nb);

}  // namespace dacsfl
