// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#include "dacsfl/expr.hpp"

#include <cctype>
#include <cmath>
#include <limits>

namespace dacsfl {

struct Expr::Node {
  Kind kind = Kind::Number;
  Rational value;
  std::string name;
  Func func = Func::Sin;
  long exp = 0;
  std::vector<Expr> ops;
};

class ExprAccess {
 public:
  static Expr make(Expr::Node n) { return Expr(std::make_shared<const Expr::Node>(std::move(n))); }
  static const Expr::Node& node(const Expr& e) { return *e.node_; }
  static bool same(const Expr& a, const Expr& b) { return a.node_ == b.node_; }
};

namespace {

Expr make_number(const Rational& v) {
  Expr::Node n;
  n.kind = Expr::Kind::Number;
  n.value = v;
  n.value.canonicalize();
  return ExprAccess::make(std::move(n));
}

const Expr& zero_expr() {
  static const Expr z = make_number(0);
  return z;
}

const Expr& one_expr() {
  static const Expr o = make_number(1);
  return o;
}

Expr make_power(const Expr& base, long k) {
  Expr::Node n;
  n.kind = Expr::Kind::Power;
  n.exp = k;
  n.ops = {base};
  return ExprAccess::make(std::move(n));
}

Expr make_product(std::vector<Expr> ops) {
  Expr::Node n;
  n.kind = Expr::Kind::Product;
  n.ops = std::move(ops);
  return ExprAccess::make(std::move(n));
}

Expr make_sum(std::vector<Expr> ops) {
  Expr::Node n;
  n.kind = Expr::Kind::Sum;
  n.ops = std::move(ops);
  return ExprAccess::make(std::move(n));
}

Expr make_call(Func f, const Expr& arg) {
  Expr::Node n;
  n.kind = Expr::Kind::Function;
  n.func = f;
  n.ops = {arg};
  return ExprAccess::make(std::move(n));
}

Rational rational_pow(const Rational& b, long k) {
  if (k < 0) {
    if (b == 0) throw Error(ErrorCode::Singular, "division by zero");
    Rational inv = 1 / b;
    return rational_pow(inv, -k);
  }
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), b.get_num_mpz_t(), static_cast<unsigned long>(k));
  mpz_pow_ui(den.get_mpz_t(), b.get_den_mpz_t(), static_cast<unsigned long>(k));
  Rational r(num, den);
  r.canonicalize();
  return r;
}

int sign_of(int c) { return c < 0 ? -1 : (c > 0 ? 1 : 0); }

int compare_core(const Expr& p, const Expr& q);

int compare_elem(const Expr& x, const Expr& y) {
  bool xn = x.is_number(), yn = y.is_number();
  if (xn && yn) return sign_of(cmp(x.value(), y.value()));
  if (xn) return -1;
  if (yn) return 1;
  const Expr& bx = x.kind() == Expr::Kind::Power ? x.base() : x;
  const Expr& by = y.kind() == Expr::Kind::Power ? y.base() : y;
  long ex = x.kind() == Expr::Kind::Power ? x.exponent() : 1;
  long ey = y.kind() == Expr::Kind::Power ? y.exponent() : 1;
  int c = compare_core(bx, by);
  if (c != 0) return c;
  return ex < ey ? -1 : (ex > ey ? 1 : 0);
}

int kind_rank(Expr::Kind k) {
  switch (k) {
    case Expr::Kind::Number: return 0;
    case Expr::Kind::Symbol: return 1;
    case Expr::Kind::Function: return 2;
    case Expr::Kind::Sum: return 3;
    case Expr::Kind::Power: return 4;
    case Expr::Kind::Product: return 5;
  }
  return 6;
}

int compare_lists(const std::vector<Expr>& a, const std::vector<Expr>& b) {
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    int c = compare(a[i], b[i]);
    if (c != 0) return c;
  }
  return a.size() < b.size() ? -1 : (a.size() > b.size() ? 1 : 0);
}

int compare_core(const Expr& p, const Expr& q) {
  if (ExprAccess::same(p, q)) return 0;
  int rp = kind_rank(p.kind()), rq = kind_rank(q.kind());
  if (rp != rq) return rp < rq ? -1 : 1;
  switch (p.kind()) {
    case Expr::Kind::Number: return sign_of(cmp(p.value(), q.value()));
    case Expr::Kind::Symbol: return sign_of(p.name().compare(q.name()));
    case Expr::Kind::Function:
      if (p.func() != q.func()) return static_cast<int>(p.func()) < static_cast<int>(q.func()) ? -1 : 1;
      return compare(p.arg(), q.arg());
    default: return compare_lists(p.operands(), q.operands());
  }
}

std::pair<Rational, Expr> split_coefficient(const Expr& t) {
  if (t.is_number()) return {t.value(), one_expr()};
  if (t.kind() == Expr::Kind::Product && t.operands().front().is_number()) {
    const auto& ops = t.operands();
    if (ops.size() == 2) return {ops[0].value(), ops[1]};
    return {ops[0].value(), make_product(std::vector<Expr>(ops.begin() + 1, ops.end()))};
  }
  return {Rational(1), t};
}

Expr with_coefficient(const Rational& c, const Expr& rest) {
  if (c == 1) return rest;
  if (c == 0) return zero_expr();
  std::vector<Expr> ops{make_number(c)};
  if (rest.kind() == Expr::Kind::Product) {
    ops.insert(ops.end(), rest.operands().begin(), rest.operands().end());
  } else {
    ops.push_back(rest);
  }
  return make_product(std::move(ops));
}

bool perfect_square(const mpz_class& z, mpz_class& root) {
  if (z < 0) return false;
  if (mpz_perfect_square_p(z.get_mpz_t()) == 0) return false;
  mpz_sqrt(root.get_mpz_t(), z.get_mpz_t());
  return true;
}

}  // namespace

const char* func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Tan: return "tan";
    case Func::Sec: return "sec";
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Sqrt: return "sqrt";
  }
  return "?";
}

Expr::Expr() : Expr(zero_expr()) {}
Expr::Expr(int v) : Expr(make_number(Rational(v))) {}
Expr::Expr(long v) : Expr(make_number(Rational(v))) {}
Expr::Expr(const Rational& v) : Expr(make_number(v)) {}

Expr Expr::number(const Rational& v) { return make_number(v); }

Expr Expr::symbol(const std::string& name) {
  Node n;
  n.kind = Kind::Symbol;
  n.name = name;
  return ExprAccess::make(std::move(n));
}

Expr Expr::call(Func f, const Expr& arg) {
  if (arg.is_number()) {
    const Rational& v = arg.value();
    if (v == 0) {
      switch (f) {
        case Func::Sin:
        case Func::Tan:
        case Func::Sqrt: return zero_expr();
        case Func::Cos:
        case Func::Sec:
        case Func::Exp: return one_expr();
        case Func::Log: break;
      }
    }
    if (f == Func::Log && v == 1) return zero_expr();
    if (f == Func::Sqrt && v > 0) {
      mpz_class rn, rd;
      if (perfect_square(v.get_num(), rn) && perfect_square(v.get_den(), rd)) {
        Rational r(rn, rd);
        r.canonicalize();
        return make_number(r);
      }
    }
  }
  return make_call(f, arg);
}

Expr Expr::pow(const Expr& base, long k) {
  if (k == 0) return one_expr();
  if (k == 1) return base;
  switch (base.kind()) {
    case Kind::Number: return make_number(rational_pow(base.value(), k));
    case Kind::Power: return Expr::pow(base.base(), base.exponent() * k);
    case Kind::Product: {
      std::vector<Expr> fs;
      for (const auto& f : base.operands()) fs.push_back(Expr::pow(f, k));
      return Expr::product(fs);
    }
    default: return make_power(base, k);
  }
}

Expr Expr::sum(const std::vector<Expr>& terms) {
  Rational constant = 0;
  std::map<Expr, Rational, ExprLess> collected;
  auto add = [&](const Expr& t) {
    if (t.is_number()) {
      constant += t.value();
      return;
    }
    auto [c, rest] = split_coefficient(t);
    collected[rest] += c;
  };
  for (const auto& t : terms) {
    if (t.kind() == Kind::Sum) {
      for (const auto& s : t.operands()) add(s);
    } else {
      add(t);
    }
  }
  std::vector<Expr> ops;
  if (constant != 0) ops.push_back(make_number(constant));
  for (const auto& [rest, c] : collected) {
    if (c != 0) ops.push_back(with_coefficient(c, rest));
  }
  if (ops.empty()) return zero_expr();
  if (ops.size() == 1) return ops.front();
  return make_sum(std::move(ops));
}

Expr Expr::product(const std::vector<Expr>& factors) {
  Rational coeff = 1;
  std::map<Expr, long, ExprLess> powers;
  auto add = [&](const Expr& f) {
    switch (f.kind()) {
      case Kind::Number: coeff *= f.value(); break;
      case Kind::Power: powers[f.base()] += f.exponent(); break;
      default: powers[f] += 1; break;
    }
  };
  for (const auto& f : factors) {
    if (f.kind() == Kind::Product) {
      for (const auto& g : f.operands()) add(g);
    } else {
      add(f);
    }
  }
  if (coeff == 0) return zero_expr();
  std::vector<Expr> ops;
  if (coeff != 1) ops.push_back(make_number(coeff));
  for (const auto& [b, e] : powers) {
    if (e == 0) continue;
    ops.push_back(e == 1 ? b : make_power(b, e));
  }
  if (ops.empty()) return make_number(coeff);
  if (ops.size() == 1) return ops.front();
  return make_product(std::move(ops));
}

Expr::Kind Expr::kind() const { return node_->kind; }
bool Expr::is_zero() const { return node_->kind == Kind::Number && node_->value == 0; }
bool Expr::is_one() const { return node_->kind == Kind::Number && node_->value == 1; }
const Rational& Expr::value() const { return node_->value; }
const std::string& Expr::name() const { return node_->name; }
Func Expr::func() const { return node_->func; }
long Expr::exponent() const { return node_->exp; }
const Expr& Expr::base() const { return node_->ops.front(); }
const Expr& Expr::arg() const { return node_->ops.front(); }
const std::vector<Expr>& Expr::operands() const { return node_->ops; }

int compare(const Expr& a, const Expr& b) {
  if (ExprAccess::same(a, b)) return 0;
  bool pa = a.kind() == Expr::Kind::Product, pb = b.kind() == Expr::Kind::Product;
  if (!pa && !pb) return compare_elem(a, b);
  std::vector<Expr> la = pa ? a.operands() : std::vector<Expr>{a};
  std::vector<Expr> lb = pb ? b.operands() : std::vector<Expr>{b};
  std::size_t n = std::min(la.size(), lb.size());
  for (std::size_t i = 0; i < n; ++i) {
    int c = compare_elem(la[i], lb[i]);
    if (c != 0) return c;
  }
  return la.size() < lb.size() ? -1 : (la.size() > lb.size() ? 1 : 0);
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::sum({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::sum({a, Expr::product({Expr(-1), b})}); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::product({a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::product({a, Expr::pow(b, -1)}); }
Expr operator-(const Expr& a) { return Expr::product({Expr(-1), a}); }

// ---------------------------------------------------------------- printing

namespace {

std::string rational_str(const Rational& r) { return r.get_str(); }

bool negative_term(const Expr& t) {
  if (t.is_number()) return t.value() < 0;
  if (t.kind() == Expr::Kind::Product) {
    const Expr& c = t.operands().front();
    return c.is_number() && c.value() < 0;
  }
  return false;
}

enum Level { kTop = 0, kFactor = 1, kAtom = 2 };

std::string print(const Expr& e, int level);

std::string print_factor(const Expr& f) {
  // factor inside a product or after '/'
  if (f.kind() == Expr::Kind::Sum) return "(" + print(f, kTop) + ")";
  return print(f, kFactor);
}

std::string print(const Expr& e, int level) {
  switch (e.kind()) {
    case Expr::Kind::Number: {
      std::string s = rational_str(e.value());
      bool compound = e.value() < 0 || e.value().get_den() != 1;
      if (level >= kAtom && compound) return "(" + s + ")";
      if (level >= kFactor && e.value() < 0) return "(" + s + ")";
      return s;
    }
    case Expr::Kind::Symbol: return e.name();
    case Expr::Kind::Function: return std::string(func_name(e.func())) + "(" + print(e.arg(), kTop) + ")";
    case Expr::Kind::Power: {
      if (e.exponent() < 0) {
        std::string s = "1/" + print_factor(Expr::pow(e.base(), -e.exponent()));
        return level >= kFactor ? "(" + s + ")" : s;
      }
      std::string b = e.base().kind() == Expr::Kind::Sum ? "(" + print(e.base(), kTop) + ")" : print(e.base(), kAtom);
      return b + "^" + std::to_string(e.exponent());
    }
    case Expr::Kind::Product: {
      Rational c = 1;
      std::vector<Expr> num, den;
      for (const auto& f : e.operands()) {
        if (f.is_number()) {
          c = f.value();
        } else if (f.kind() == Expr::Kind::Power && f.exponent() < 0) {
          den.push_back(Expr::pow(f.base(), -f.exponent()));
        } else {
          num.push_back(f);
        }
      }
      bool neg = c < 0;
      Rational a = neg ? Rational(-c) : c;
      std::string s;
      if (a != 1 || num.empty()) s = rational_str(a);
      for (const auto& f : num) {
        if (!s.empty()) s += "*";
        s += print_factor(f);
      }
      for (const auto& f : den) s += "/" + print_factor(f);
      if (neg) s = "-" + s;
      if (level >= kFactor && (neg || !den.empty())) return "(" + s + ")";
      return s;
    }
    case Expr::Kind::Sum: {
      std::vector<Expr> terms;
      Expr constant;
      bool has_constant = false;
      for (const auto& t : e.operands()) {
        if (t.is_number()) {
          constant = t;
          has_constant = true;
        } else {
          terms.push_back(t);
        }
      }
      if (has_constant) terms.push_back(constant);
      auto piece = [](const Expr& x) {
        return x.kind() == Expr::Kind::Sum ? "(" + print(x, kTop) + ")" : print(x, kTop);
      };
      std::string s;
      for (std::size_t i = 0; i < terms.size(); ++i) {
        const Expr& t = terms[i];
        if (i == 0) {
          s = piece(t);
        } else if (negative_term(t)) {
          s += " - " + piece(-t);
        } else {
          s += " + " + piece(t);
        }
      }
      if (level >= kFactor) return "(" + s + ")";
      return s;
    }
  }
  return "?";
}

}  // namespace

std::string Expr::str() const { return print(*this, kTop); }

// ----------------------------------------------------------------- parsing

namespace {

class Parser {
 public:
  Parser(std::string_view text, const std::set<std::string>* known) : text_(text), known_(known) {}

  Expr parse() {
    Expr e = parse_sum();
    skip_ws();
    if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(ErrorCode::Parse, "syntax error at position " + std::to_string(pos_) + ": " + what, pos_);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_sum() {
    Expr acc = parse_term();
    std::vector<Expr> terms{acc};
    while (true) {
      if (accept('+')) {
        terms.push_back(parse_term());
      } else if (accept('-')) {
        terms.push_back(-parse_term());
      } else {
        break;
      }
    }
    return terms.size() == 1 ? terms.front() : Expr::sum(terms);
  }

  Expr parse_term() {
    Expr acc = parse_unary();
    while (true) {
      if (accept('*')) {
        acc = acc * parse_unary();
      } else if (accept('/')) {
        std::size_t at = pos_;
        Expr d = parse_unary();
        if (d.is_zero()) {
          pos_ = at;
          fail("division by zero");
        }
        acc = acc / d;
      } else {
        break;
      }
    }
    return acc;
  }

  Expr parse_unary() {
    if (accept('-')) return -parse_unary();
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr b = parse_primary();
    if (accept('^')) {
      std::size_t at = pos_;
      Expr k = parse_unary();
      if (!k.is_number() || k.value().get_den() != 1 || !k.value().get_num().fits_slong_p()) {
        pos_ = at;
        fail("exponent must be an integer");
      }
      long kv = k.value().get_num().get_si();
      if (b.is_zero() && kv < 0) {
        pos_ = at;
        fail("division by zero");
      }
      return Expr::pow(b, kv);
    }
    return b;
  }

  Expr parse_number() {
    std::size_t start = pos_;
    mpz_class mantissa = 0;
    long frac_digits = 0;
    bool any = false;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      mantissa = mantissa * 10 + (text_[pos_] - '0');
      ++pos_;
      any = true;
    }
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        mantissa = mantissa * 10 + (text_[pos_] - '0');
        ++frac_digits;
        ++pos_;
        any = true;
      }
    }
    if (!any) {
      pos_ = start;
      fail("malformed number");
    }
    long exp10 = -frac_digits;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      int sign = 1;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
        if (text_[pos_] == '-') sign = -1;
        ++pos_;
      }
      if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        pos_ = save;
        fail("malformed exponent");
      }
      long e = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        e = e * 10 + (text_[pos_] - '0');
        if (e > 10000) fail("exponent too large");
        ++pos_;
      }
      exp10 += sign * e;
    }
    Rational r(mantissa);
    mpz_class p10;
    mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exp10)));
    if (exp10 >= 0) {
      r *= p10;
    } else {
      r /= p10;
    }
    r.canonicalize();
    return Expr::number(r);
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_sum();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      std::string id(text_.substr(start, pos_ - start));
      static const std::map<std::string, Func> funcs = {
          {"sin", Func::Sin}, {"cos", Func::Cos}, {"tan", Func::Tan}, {"sec", Func::Sec},
          {"exp", Func::Exp}, {"log", Func::Log}, {"sqrt", Func::Sqrt}};
      auto it = funcs.find(id);
      if (it != funcs.end()) {
        if (!accept('(')) fail("expected '(' after " + id);
        Expr a = parse_sum();
        if (!accept(')')) fail("expected ')'");
        return Expr::call(it->second, a);
      }
      if (known_ != nullptr && known_->count(id) == 0) {
        throw ParseError(ErrorCode::UnknownIdentifier,
                         "unknown identifier '" + id + "' at position " + std::to_string(start), start);
      }
      return Expr::symbol(id);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view text_;
  const std::set<std::string>* known_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text, const std::set<std::string>* known) {
  return Parser(text, known).parse();
}

// ---------------------------------------------------------- calculus & co.

namespace {

Expr derive(const Expr& e, const std::string& v) {
  switch (e.kind()) {
    case Expr::Kind::Number: return Expr(0);
    case Expr::Kind::Symbol: return e.name() == v ? Expr(1) : Expr(0);
    case Expr::Kind::Sum: {
      std::vector<Expr> ts;
      for (const auto& t : e.operands()) ts.push_back(derive(t, v));
      return Expr::sum(ts);
    }
    case Expr::Kind::Product: {
      const auto& ops = e.operands();
      std::vector<Expr> ts;
      for (std::size_t i = 0; i < ops.size(); ++i) {
        Expr d = derive(ops[i], v);
        if (d.is_zero()) continue;
        std::vector<Expr> fs;
        for (std::size_t j = 0; j < ops.size(); ++j) fs.push_back(j == i ? d : ops[j]);
        ts.push_back(Expr::product(fs));
      }
      return Expr::sum(ts);
    }
    case Expr::Kind::Power: {
      Expr d = derive(e.base(), v);
      if (d.is_zero()) return Expr(0);
      return Expr::product({Expr(e.exponent()), Expr::pow(e.base(), e.exponent() - 1), d});
    }
    case Expr::Kind::Function: {
      const Expr& a = e.arg();
      Expr d = derive(a, v);
      if (d.is_zero()) return Expr(0);
      switch (e.func()) {
        case Func::Sin: return Expr::call(Func::Cos, a) * d;
        case Func::Cos: return -(Expr::call(Func::Sin, a) * d);
        case Func::Tan: return Expr::pow(Expr::call(Func::Sec, a), 2) * d;
        case Func::Sec: return Expr::call(Func::Sec, a) * Expr::call(Func::Tan, a) * d;
        case Func::Exp: return e * d;
        case Func::Log: return d / a;
        case Func::Sqrt: return d / (Expr(2) * e);
      }
    }
  }
  return Expr(0);
}

void collect_symbols(const Expr& e, std::set<std::string>& out) {
  if (e.is_symbol()) {
    out.insert(e.name());
    return;
  }
  for (const auto& o : e.operands()) collect_symbols(o, out);
}

}  // namespace

Expr differentiate(const Expr& e, const std::string& var) {
  if (!depends_on(e, var)) return Expr(0);
  return simplify(derive(e, var));
}

Expr substitute(const Expr& e, const std::map<std::string, Expr>& values) {
  switch (e.kind()) {
    case Expr::Kind::Number: return e;
    case Expr::Kind::Symbol: {
      auto it = values.find(e.name());
      return it == values.end() ? e : it->second;
    }
    case Expr::Kind::Function: return Expr::call(e.func(), substitute(e.arg(), values));
    case Expr::Kind::Power: return Expr::pow(substitute(e.base(), values), e.exponent());
    case Expr::Kind::Product: {
      std::vector<Expr> fs;
      for (const auto& f : e.operands()) fs.push_back(substitute(f, values));
      return Expr::product(fs);
    }
    case Expr::Kind::Sum: {
      std::vector<Expr> ts;
      for (const auto& t : e.operands()) ts.push_back(substitute(t, values));
      return Expr::sum(ts);
    }
  }
  return e;
}

std::set<std::string> free_symbols(const Expr& e) {
  std::set<std::string> out;
  collect_symbols(e, out);
  return out;
}

bool depends_on(const Expr& e, const std::string& var) {
  if (e.is_symbol()) return e.name() == var;
  for (const auto& o : e.operands()) {
    if (depends_on(o, var)) return true;
  }
  return false;
}

double Point::at(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw Error(ErrorCode::UnknownIdentifier, "no value bound for '" + name + "'");
  return it->second;
}

namespace {

double apply_func(Func f, double a) {
  switch (f) {
    case Func::Sin: return std::sin(a);
    case Func::Cos: return std::cos(a);
    case Func::Tan: return std::tan(a);
    case Func::Sec: return 1.0 / std::cos(a);
    case Func::Exp: return std::exp(a);
    case Func::Log: return std::log(std::fabs(a));
    case Func::Sqrt: return a < 0 ? std::numeric_limits<double>::quiet_NaN() : std::sqrt(a);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double powi(double b, long k) {
  if (k < 0) return 1.0 / powi(b, -k);
  double r = 1.0;
  while (k > 0) {
    if (k & 1) r *= b;
    b *= b;
    k >>= 1;
  }
  return r;
}

}  // namespace

double evaluate(const Expr& e, const Point& p) {
  switch (e.kind()) {
    case Expr::Kind::Number: return e.value().get_d();
    case Expr::Kind::Symbol: return p.at(e.name());
    case Expr::Kind::Function: return apply_func(e.func(), evaluate(e.arg(), p));
    case Expr::Kind::Power: return powi(evaluate(e.base(), p), e.exponent());
    case Expr::Kind::Product: {
      double r = 1.0;
      for (const auto& f : e.operands()) r *= evaluate(f, p);
      return r;
    }
    case Expr::Kind::Sum: {
      double r = 0.0;
      for (const auto& t : e.operands()) r += evaluate(t, p);
      return r;
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

namespace {

enum OpCode { kConst, kSlot, kAdd, kMul, kPow, kFunc };

void emit(const Expr& e, const std::vector<std::string>& slots, std::vector<std::pair<int, std::pair<int, double>>>& out,
          std::size_t depth, std::size_t& max_depth) {
  max_depth = std::max(max_depth, depth + 1);
  switch (e.kind()) {
    case Expr::Kind::Number: out.push_back({kConst, {0, e.value().get_d()}}); return;
    case Expr::Kind::Symbol: {
      for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i] == e.name()) {
          out.push_back({kSlot, {static_cast<int>(i), 0.0}});
          return;
        }
      }
      throw Error(ErrorCode::UnknownIdentifier, "no slot for '" + e.name() + "'");
    }
    case Expr::Kind::Function:
      emit(e.arg(), slots, out, depth, max_depth);
      out.push_back({kFunc, {static_cast<int>(e.func()), 0.0}});
      return;
    case Expr::Kind::Power:
      emit(e.base(), slots, out, depth, max_depth);
      out.push_back({kPow, {static_cast<int>(e.exponent()), 0.0}});
      return;
    case Expr::Kind::Product:
    case Expr::Kind::Sum: {
      const auto& ops = e.operands();
      for (std::size_t i = 0; i < ops.size(); ++i) emit(ops[i], slots, out, depth + i, max_depth);
      out.push_back({e.kind() == Expr::Kind::Sum ? kAdd : kMul, {static_cast<int>(ops.size()), 0.0}});
      return;
    }
  }
}

}  // namespace

Compiled::Compiled(const Expr& e, const std::vector<std::string>& slots) {
  std::vector<std::pair<int, std::pair<int, double>>> raw;
  emit(e, slots, raw, 0, stack_size_);
  for (const auto& [code, rest] : raw) ops_.push_back(Op{code, rest.first, rest.second});
}

double Compiled::operator()(const double* slots) const {
  thread_local std::vector<double> stack;
  if (stack.size() < stack_size_ + 1) stack.resize(stack_size_ + 1);
  std::size_t top = 0;
  for (const auto& op : ops_) {
    switch (op.code) {
      case kConst: stack[top++] = op.value; break;
      case kSlot: stack[top++] = slots[op.arg]; break;
      case kAdd: {
        double r = 0.0;
        for (int i = 0; i < op.arg; ++i) r += stack[top - op.arg + i];
        top -= op.arg;
        stack[top++] = r;
        break;
      }
      case kMul: {
        double r = 1.0;
        for (int i = 0; i < op.arg; ++i) r *= stack[top - op.arg + i];
        top -= op.arg;
        stack[top++] = r;
        break;
      }
      case kPow: stack[top - 1] = powi(stack[top - 1], op.arg); break;
      case kFunc: stack[top - 1] = apply_func(static_cast<Func>(op.arg), stack[top - 1]); break;
      default: break;
    }
  }
  return top == 0 ? 0.0 : stack[top - 1];
}

}  // namespace dacsfl
