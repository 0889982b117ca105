// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#pragma once

#include <random>
#include <string>
#include <vector>

#include "dacsfl/expr.hpp"

namespace dacsfl::testing {

// Random expression over the given variables; depth bounds the tree height.
inline Expr random_expr(std::mt19937_64& rng, const std::vector<std::string>& vars, int depth,
                        bool with_functions = true) {
  std::uniform_int_distribution<int> pick(0, 9);
  int choice = depth <= 0 ? pick(rng) % 2 : pick(rng);
  auto leaf = [&]() -> Expr {
    std::uniform_int_distribution<int> v(0, static_cast<int>(vars.size()) - 1);
    std::uniform_int_distribution<int> c(-5, 5);
    std::uniform_int_distribution<int> d(1, 4);
    if (pick(rng) < 6) return Expr::symbol(vars[v(rng)]);
    return Expr::number(Rational(c(rng), d(rng)));
  };
  switch (choice) {
    case 0:
    case 1: return leaf();
    case 2:
    case 3: return random_expr(rng, vars, depth - 1, with_functions) + random_expr(rng, vars, depth - 1, with_functions);
    case 4: return random_expr(rng, vars, depth - 1, with_functions) - random_expr(rng, vars, depth - 1, with_functions);
    case 5:
    case 6: return random_expr(rng, vars, depth - 1, with_functions) * random_expr(rng, vars, depth - 1, with_functions);
    case 7: {
      // denominators kept away from zero near the sampling region
      Expr d = random_expr(rng, vars, depth - 1, with_functions);
      return random_expr(rng, vars, depth - 1, with_functions) / (Expr(3) + Expr::pow(d, 2));
    }
    case 8: {
      std::uniform_int_distribution<int> k(2, 3);
      return Expr::pow(random_expr(rng, vars, depth - 1, with_functions), k(rng));
    }
    default: {
      if (!with_functions) return leaf();
      std::uniform_int_distribution<int> f(0, 3);
      Expr a = random_expr(rng, vars, depth - 1, with_functions);
      switch (f(rng)) {
        case 0: return Expr::call(Func::Sin, a);
        case 1: return Expr::call(Func::Cos, a);
        case 2: return Expr::call(Func::Exp, a / Expr(4));
        default: return Expr::call(Func::Sqrt, Expr(4) + Expr::pow(a, 2));
      }
    }
  }
}

}  // namespace dacsfl::testing
