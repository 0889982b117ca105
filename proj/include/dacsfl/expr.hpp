// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#pragma once

#include <gmpxx.h>

#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dacsfl/common.hpp"

namespace dacsfl {

using Rational = mpq_class;

enum class Func { Sin, Cos, Tan, Sec, Exp, Log, Sqrt };

const char* func_name(Func f);

// Immutable expression tree.  Constructors keep a light canonical form:
// sums and products are flattened, numeric parts folded, like terms and
// equal bases collected and operands sorted.
class Expr {
 public:
  enum class Kind { Number, Symbol, Function, Power, Product, Sum };

  Expr();
  Expr(int v);  // NOLINT
  Expr(long v);  // NOLINT
  Expr(const Rational& v);  // NOLINT

  static Expr number(const Rational& v);
  static Expr symbol(const std::string& name);
  static Expr call(Func f, const Expr& arg);
  static Expr pow(const Expr& base, long exponent);
  static Expr sum(const std::vector<Expr>& terms);
  static Expr product(const std::vector<Expr>& factors);

  Kind kind() const;
  bool is_number() const { return kind() == Kind::Number; }
  bool is_symbol() const { return kind() == Kind::Symbol; }
  bool is_zero() const;
  bool is_one() const;
  const Rational& value() const;
  const std::string& name() const;
  Func func() const;
  long exponent() const;
  const Expr& base() const;  // Power
  const Expr& arg() const;   // Function
  const std::vector<Expr>& operands() const;

  std::string str() const;

  struct Node;

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;

  friend class ExprAccess;
};

int compare(const Expr& a, const Expr& b);
inline bool operator==(const Expr& a, const Expr& b) { return compare(a, b) == 0; }
inline bool operator!=(const Expr& a, const Expr& b) { return compare(a, b) != 0; }
struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

class ParseError : public Error {
 public:
  ParseError(ErrorCode code, const std::string& message, std::size_t position)
      : Error(code, message), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Parses the expression grammar: rational/decimal literals, identifiers,
// + - * /, integer powers (^) and calls to sin cos tan sec exp log sqrt.
// When `known` is non-null, identifiers outside it are rejected.
Expr parse_expr(std::string_view text, const std::set<std::string>* known = nullptr);

Expr differentiate(const Expr& e, const std::string& var);
Expr simplify(const Expr& e);
Expr substitute(const Expr& e, const std::map<std::string, Expr>& values);
std::set<std::string> free_symbols(const Expr& e);
bool depends_on(const Expr& e, const std::string& var);

// Numerator and denominator of the simplified rational form.
std::pair<Expr, Expr> numer_denom(const Expr& e);

// Sign of the leading coefficient of the simplified numerator (0 for zero).
int leading_sign(const Expr& e);

class Point {
 public:
  Point() = default;
  void set(const std::string& name, double value) { values_[name] = value; }
  bool has(const std::string& name) const { return values_.count(name) != 0; }
  double at(const std::string& name) const;
  const std::map<std::string, double>& values() const { return values_; }

 private:
  std::map<std::string, double> values_;
};

// Returns NaN or an infinity when the expression is singular at p.
double evaluate(const Expr& e, const Point& p);

// Expression compiled against a fixed slot layout for repeated evaluation.
class Compiled {
 public:
  Compiled() = default;
  Compiled(const Expr& e, const std::vector<std::string>& slots);
  double operator()(const double* slots) const;

 private:
  struct Op {
    int code;
    int arg;
    double value;
  };
  std::vector<Op> ops_;
  std::size_t stack_size_ = 0;
};

}  // namespace dacsfl
