// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

// Rational-function normal form over kernels (symbols and elementary
// function applications).  Numerators are reduced modulo sin^2 + cos^2 = 1
// and sqrt(c)^2 = c, which makes the zero test exact for such expressions.

#include <algorithm>

#include "dacsfl/expr.hpp"

namespace dacsfl {

namespace {

using Monomial = std::vector<std::pair<Expr, int>>;

int mono_cmp(const Monomial& a, const Monomial& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    int c = compare(a[i].first, b[j].first);
    if (c < 0) return 1;
    if (c > 0) return -1;
    if (a[i].second != b[j].second) return a[i].second < b[j].second ? -1 : 1;
    ++i;
    ++j;
  }
  if (i < a.size()) return 1;
  if (j < b.size()) return -1;
  return 0;
}

struct MonoLess {
  bool operator()(const Monomial& a, const Monomial& b) const { return mono_cmp(a, b) < 0; }
};

using Poly = std::map<Monomial, Rational, MonoLess>;

Monomial mono_mul(const Monomial& a, const Monomial& b) {
  Monomial out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j >= b.size()) {
      out.push_back(a[i++]);
    } else if (i >= a.size()) {
      out.push_back(b[j++]);
    } else {
      int c = compare(a[i].first, b[j].first);
      if (c < 0) {
        out.push_back(a[i++]);
      } else if (c > 0) {
        out.push_back(b[j++]);
      } else {
        out.emplace_back(a[i].first, a[i].second + b[j].second);
        ++i;
        ++j;
      }
    }
  }
  return out;
}

// a / b when b divides a.
bool mono_div(const Monomial& a, const Monomial& b, Monomial& q) {
  q.clear();
  std::size_t i = 0;
  for (const auto& [k, e] : b) {
    while (i < a.size() && compare(a[i].first, k) < 0) q.push_back(a[i++]);
    if (i >= a.size() || compare(a[i].first, k) != 0 || a[i].second < e) return false;
    if (a[i].second > e) q.emplace_back(k, a[i].second - e);
    ++i;
  }
  while (i < a.size()) q.push_back(a[i++]);
  return true;
}

void poly_add_term(Poly& p, const Monomial& m, const Rational& c) {
  if (c == 0) return;
  auto it = p.find(m);
  if (it == p.end()) {
    p.emplace(m, c);
  } else {
    it->second += c;
    if (it->second == 0) p.erase(it);
  }
}

Poly poly_const(const Rational& c) {
  Poly p;
  if (c != 0) p.emplace(Monomial{}, c);
  return p;
}

Poly poly_kernel(const Expr& k, int e = 1) {
  Poly p;
  p.emplace(Monomial{{k, e}}, Rational(1));
  return p;
}

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly out;
  for (const auto& [ma, ca] : a) {
    for (const auto& [mb, cb] : b) poly_add_term(out, mono_mul(ma, mb), ca * cb);
  }
  return out;
}

Poly poly_scale(const Poly& a, const Rational& s) {
  if (s == 0) return {};
  Poly out = a;
  for (auto& [m, c] : out) c *= s;
  return out;
}

void poly_accumulate(Poly& acc, const Poly& b) {
  for (const auto& [m, c] : b) poly_add_term(acc, m, c);
}

Poly poly_pow(const Poly& a, int k) {
  Poly r = poly_const(1);
  for (int i = 0; i < k; ++i) r = poly_mul(r, a);
  return r;
}

bool poly_is_constant(const Poly& p) { return p.empty() || (p.size() == 1 && p.begin()->first.empty()); }

int poly_cmp(const Poly& a, const Poly& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  for (; ia != a.end() && ib != b.end(); ++ia, ++ib) {
    int c = mono_cmp(ia->first, ib->first);
    if (c != 0) return c;
    int d = cmp(ia->second, ib->second);
    if (d != 0) return d < 0 ? -1 : 1;
  }
  if (ia != a.end()) return 1;
  if (ib != b.end()) return -1;
  return 0;
}

bool is_sin_kernel(const Expr& k) { return k.kind() == Expr::Kind::Function && k.func() == Func::Sin; }

bool is_sqrt_constant(const Expr& k) {
  return k.kind() == Expr::Kind::Function && k.func() == Func::Sqrt && k.arg().is_number() && k.arg().value() > 0;
}

bool needs_reduction(const Poly& p) {
  for (const auto& [m, c] : p) {
    for (const auto& [k, e] : m) {
      if (e >= 2 && (is_sin_kernel(k) || is_sqrt_constant(k))) return true;
    }
  }
  return false;
}

Poly reduce(const Poly& p) {
  if (!needs_reduction(p)) return p;
  Poly out;
  for (const auto& [m, c] : p) {
    Poly t = poly_const(c);
    Monomial rest;
    for (const auto& [k, e] : m) {
      if (e >= 2 && is_sin_kernel(k)) {
        if (e % 2) rest.emplace_back(k, 1);
        Poly one_minus_cos2 = poly_const(1);
        poly_add_term(one_minus_cos2, Monomial{{Expr::call(Func::Cos, k.arg()), 2}}, Rational(-1));
        t = poly_mul(t, poly_pow(one_minus_cos2, e / 2));
      } else if (e >= 2 && is_sqrt_constant(k)) {
        if (e % 2) rest.emplace_back(k, 1);
        Rational v = 1;
        for (int i = 0; i < e / 2; ++i) v *= k.arg().value();
        t = poly_scale(t, v);
      } else {
        rest.emplace_back(k, e);
      }
    }
    Poly r;
    r.emplace(rest, Rational(1));
    poly_accumulate(out, poly_mul(t, r));
  }
  return out;
}

bool poly_exact_div(const Poly& a, const Poly& g, Poly& q) {
  q.clear();
  if (g.empty()) return false;
  const auto& [lm_g, lc_g] = *g.rbegin();
  Poly r = a;
  Monomial t;
  while (!r.empty()) {
    const auto& [lm_r, lc_r] = *r.rbegin();
    if (!mono_div(lm_r, lm_g, t)) return false;
    Rational c = lc_r / lc_g;
    Monomial tm = t;
    poly_add_term(q, tm, c);
    for (const auto& [mg, cg] : g) poly_add_term(r, mono_mul(tm, mg), -c * cg);
  }
  return true;
}

struct RF {
  Poly num;
  std::vector<std::pair<Poly, int>> den;
};

void cancel(RF& r) {
  if (r.num.empty()) {
    r.den.clear();
    return;
  }
  Poly q;
  for (auto& [g, k] : r.den) {
    while (k > 0 && poly_exact_div(r.num, g, q)) {
      r.num = q;
      --k;
    }
  }
  r.den.erase(std::remove_if(r.den.begin(), r.den.end(), [](const auto& f) { return f.second == 0; }), r.den.end());
}

void insert_factor(RF& r, const Poly& g, int k) {
  for (auto& f : r.den) {
    if (poly_cmp(f.first, g) == 0) {
      f.second += k;
      return;
    }
  }
  auto pos = std::find_if(r.den.begin(), r.den.end(), [&](const auto& f) { return poly_cmp(g, f.first) < 0; });
  r.den.insert(pos, {g, k});
}

// Divides r by f^k, splitting off the leading coefficient and the monomial
// content of f.
void divide_by(RF& r, const Poly& f_raw, int k) {
  Poly f = reduce(f_raw);
  if (f.empty()) throw Error(ErrorCode::Singular, "division by zero");
  Rational lc = f.rbegin()->second;
  Monomial content = f.begin()->first;
  for (const auto& [m, c] : f) {
    Monomial next;
    std::size_t i = 0;
    for (const auto& [kk, e] : content) {
      while (i < m.size() && compare(m[i].first, kk) < 0) ++i;
      if (i < m.size() && compare(m[i].first, kk) == 0) next.emplace_back(kk, std::min(e, m[i].second));
    }
    content = next;
    if (content.empty()) break;
  }
  Poly prim;
  Monomial q;
  for (const auto& [m, c] : f) {
    mono_div(m, content, q);
    prim.emplace(q, c / lc);
  }
  Rational s = 1;
  for (int i = 0; i < k; ++i) s *= lc;
  r.num = poly_scale(r.num, 1 / s);
  for (const auto& [kk, e] : content) insert_factor(r, poly_kernel(kk), e * k);
  if (!poly_is_constant(prim)) insert_factor(r, prim, k);
}

RF rf_const(const Rational& c) { return RF{poly_const(c), {}}; }

RF rf_add(const RF& a, const RF& b) {
  if (a.num.empty()) return b;
  if (b.num.empty()) return a;
  RF out;
  std::vector<std::pair<Poly, int>> den = a.den;
  for (const auto& [g, k] : b.den) {
    bool found = false;
    for (auto& f : den) {
      if (poly_cmp(f.first, g) == 0) {
        f.second = std::max(f.second, k);
        found = true;
      }
    }
    if (!found) den.emplace_back(g, k);
  }
  auto lift = [&](const RF& x) {
    Poly p = x.num;
    for (const auto& [g, k] : den) {
      int have = 0;
      for (const auto& [h, kh] : x.den) {
        if (poly_cmp(g, h) == 0) have = kh;
      }
      if (k > have) p = poly_mul(p, poly_pow(g, k - have));
    }
    return p;
  };
  out.num = lift(a);
  poly_accumulate(out.num, lift(b));
  out.num = reduce(out.num);
  std::sort(den.begin(), den.end(), [](const auto& x, const auto& y) { return poly_cmp(x.first, y.first) < 0; });
  out.den = den;
  cancel(out);
  return out;
}

RF rf_mul(const RF& a, const RF& b) {
  if (a.num.empty() || b.num.empty()) return rf_const(0);
  RF out;
  out.num = reduce(poly_mul(a.num, b.num));
  out.den = a.den;
  for (const auto& [g, k] : b.den) insert_factor(out, g, k);
  cancel(out);
  return out;
}

RF rf_inv(const RF& a) {
  if (a.num.empty()) throw Error(ErrorCode::Singular, "division by zero");
  RF out;
  out.num = poly_const(1);
  for (const auto& [g, k] : a.den) out.num = poly_mul(out.num, poly_pow(g, k));
  out.num = reduce(out.num);
  divide_by(out, a.num, 1);
  cancel(out);
  return out;
}

RF rf_pow(const RF& a, long k) {
  if (k < 0) return rf_pow(rf_inv(a), -k);
  RF r = rf_const(1);
  RF b = a;
  while (k > 0) {
    if (k & 1) r = rf_mul(r, b);
    k >>= 1;
    if (k > 0) b = rf_mul(b, b);
  }
  return r;
}

RF rf_neg(const RF& a) {
  RF out = a;
  out.num = poly_scale(a.num, -1);
  return out;
}

RF rf_kernel(const Expr& k) { return RF{poly_kernel(k), {}}; }

Expr poly_to_expr(const Poly& p) {
  std::vector<Expr> terms;
  terms.reserve(p.size());
  for (const auto& [m, c] : p) {
    std::vector<Expr> fs{Expr::number(c)};
    for (const auto& [k, e] : m) fs.push_back(Expr::pow(k, e));
    terms.push_back(Expr::product(fs));
  }
  return Expr::sum(terms);
}

Expr rf_to_expr(const RF& r) {
  Expr num = poly_to_expr(r.num);
  if (r.den.empty()) return num;
  std::vector<Expr> fs{num};
  for (const auto& [g, k] : r.den) fs.push_back(Expr::pow(poly_to_expr(g), -k));
  return Expr::product(fs);
}

int rf_leading_sign(const RF& r) {
  if (r.num.empty()) return 0;
  return sgn(r.num.rbegin()->second);
}

RF to_rf(const Expr& e);

// sqrt of a positive rational as coefficient * sqrt(squarefree integer).
RF sqrt_constant(const Rational& v) {
  mpz_class n = v.get_num() * v.get_den();
  Rational coeff(1, v.get_den());
  coeff.canonicalize();
  mpz_class square_part = 1;
  if (n.fits_ulong_p()) {
    unsigned long x = n.get_ui();
    for (unsigned long p = 2; p <= 10000 && p * p <= x; ++p) {
      while (x % (p * p) == 0) {
        x /= p * p;
        square_part *= p;
      }
    }
    n = x;
  }
  coeff *= Rational(square_part);
  if (n == 1) return rf_const(coeff);
  RF k = rf_kernel(Expr::call(Func::Sqrt, Expr::number(Rational(n))));
  return rf_mul(rf_const(coeff), k);
}

RF function_rf(Func f, const Expr& arg) {
  RF a = to_rf(arg);
  bool negated = false;
  if ((f == Func::Sin || f == Func::Cos || f == Func::Tan || f == Func::Sec) && rf_leading_sign(a) < 0) {
    a = rf_neg(a);
    negated = true;
  }
  Expr as = rf_to_expr(a);
  auto kernel = [&](Func g) -> RF {
    Expr c = Expr::call(g, as);
    if (c.is_number()) return rf_const(c.value());
    return rf_kernel(c);
  };
  switch (f) {
    case Func::Sin: {
      RF s = kernel(Func::Sin);
      return negated ? rf_neg(s) : s;
    }
    case Func::Cos: return kernel(Func::Cos);
    case Func::Tan: {
      RF t = rf_mul(kernel(Func::Sin), rf_inv(kernel(Func::Cos)));
      return negated ? rf_neg(t) : t;
    }
    case Func::Sec: return rf_inv(kernel(Func::Cos));
    case Func::Exp: return kernel(Func::Exp);
    case Func::Log: return kernel(Func::Log);
    case Func::Sqrt:
      if (as.is_number() && as.value() > 0) return sqrt_constant(as.value());
      return kernel(Func::Sqrt);
  }
  return rf_const(0);
}

RF to_rf(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::Number: return rf_const(e.value());
    case Expr::Kind::Symbol: return rf_kernel(e);
    case Expr::Kind::Sum: {
      RF acc = rf_const(0);
      for (const auto& t : e.operands()) acc = rf_add(acc, to_rf(t));
      return acc;
    }
    case Expr::Kind::Product: {
      RF acc = rf_const(1);
      for (const auto& f : e.operands()) acc = rf_mul(acc, to_rf(f));
      return acc;
    }
    case Expr::Kind::Power: return rf_pow(to_rf(e.base()), e.exponent());
    case Expr::Kind::Function: return function_rf(e.func(), e.arg());
  }
  return rf_const(0);
}

}  // namespace

Expr simplify(const Expr& e) {
  if (e.is_number() || e.is_symbol()) return e;
  return rf_to_expr(to_rf(e));
}

std::pair<Expr, Expr> numer_denom(const Expr& e) {
  RF r = to_rf(e);
  Expr den = Expr(1);
  std::vector<Expr> fs;
  for (const auto& [g, k] : r.den) fs.push_back(Expr::pow(poly_to_expr(g), k));
  if (!fs.empty()) den = Expr::product(fs);
  return {poly_to_expr(r.num), den};
}

int leading_sign(const Expr& e) { return rf_leading_sign(to_rf(e)); }

}  // namespace dacsfl
