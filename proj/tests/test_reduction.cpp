// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#include <gtest/gtest.h>

#include <random>

#include "dacsfl/reduction.hpp"

using namespace dacsfl;

namespace {

std::string fixture(const std::string& name) { return std::string(DACSFL_FIXTURES) + "/" + name; }

bool same(const Expr& a, const std::string& b) { return simplify(a - parse_expr(b)).is_zero(); }

// Restriction of the manipulator as printed in the reference derivation.
const char* kPrintedRestriction = R"(
[states]
y1 y2 th1 th2 Ff
[inputs]
Fx
[params]
m=1 l=1/2
[point]
y1=0 y2=0 th1=0 th2=0 Ff=0
[E]
1, 0, 0, 0, 0
0, m, 0, m*l*cos(th1), 0
0, 0, 1, 0, 0
0, m, 0, -m*l*sin(th1), 0
[F]
y2
Ff/l*sec(th1) + m*l*th2^2*sin(th1)
th2
m*l*th2^2*cos(th1)
[G]
0
tan(th1)
0
1
)";

// Independent oracle: dimensions of V_{i+1} = H^-1(E V_i + Im L).
std::vector<int> wong_v_dims(const LinearDacs& ld, int count) {
  std::vector<int> dims;
  QMatrix v = QMatrix::identity(ld.n());
  for (int i = 0; i < count; ++i) {
    dims.push_back(rank(v));
    QMatrix target = hstack(ld.E * v, ld.L);
    v = preimage(ld.H, target);
  }
  return dims;
}

}  // namespace

TEST(Reduce, Manipulator) {
  Dacs d = load_system(fixture("example52.dacs"));
  ReductionTrace t = reduce(d, Settings{});
  ASSERT_TRUE(t.admissible);
  ASSERT_EQ(t.steps.size(), 4u);
  ASSERT_EQ(t.steps[1].constraints.size(), 1u);
  EXPECT_TRUE(same(t.steps[1].constraints[0], "x1 - y1"));
  ASSERT_EQ(t.steps[2].constraints.size(), 2u);
  EXPECT_TRUE(same(t.steps[2].constraints[1], "x2 - y2"));
  EXPECT_TRUE(t.steps[3].new_constraints.empty());
  EXPECT_EQ(t.k_star, 2);
  EXPECT_EQ(t.kept_states, (std::vector<std::string>{"y1", "y2", "th1", "th2", "Ff"}));
  CrResult cr = check_cr(d, t, Settings{});
  EXPECT_TRUE(cr.ok);
  EXPECT_EQ(cr.n_star, 5);
  EXPECT_EQ(cr.r_star, 4);
  EXPECT_EQ(cr.m_star, 1);
}

TEST(Reduce, AcademicHasNoConstraints) {
  Dacs d = load_system(fixture("example51.dacs"));
  ReductionTrace t = reduce(d, Settings{});
  EXPECT_TRUE(t.admissible);
  EXPECT_TRUE(t.fixed_point);
  EXPECT_EQ(t.k_star, 0);
  EXPECT_TRUE(t.constraints.empty());
  CrResult cr = check_cr(d, t, Settings{});
  EXPECT_EQ(cr.r_star, 2);
  EXPECT_EQ(cr.m_star, 1);
}

TEST(Reduce, Inadmissible) {
  Dacs d = parse_system("[states]\nx1 x2 x3\n[point]\nx1=0 x2=0 x3=0\n[E]\n0,0,0\n0,0,0\n0,0,0\n[F]\n0\n0\n1\n");
  ReductionTrace t = reduce(d, Settings{});
  EXPECT_FALSE(t.admissible);
  EXPECT_THROW(check_cr(d, t, Settings{}), Error);
}

TEST(Restrict, AcademicMatchesReference) {
  Dacs d = load_system(fixture("example51.dacs"));
  Settings st;
  Restriction r = restrict_system(d, reduce(d, st), st);
  EXPECT_EQ(r.r_star, 2);
  EXPECT_EQ(r.m_star, 1);
  EXPECT_EQ(r.kept_inputs, std::vector<std::string>{"u1"});
  const Dacs& s = r.system;
  EXPECT_TRUE(same(s.E(0, 0), "x2") && same(s.E(0, 1), "x1") && same(s.E(0, 2), "0"));
  EXPECT_TRUE(same(s.E(1, 0), "1") && same(s.E(1, 1), "0") && same(s.E(1, 2), "1"));
  EXPECT_TRUE(same(s.F[0], "0") && same(s.F[1], "x2^2 - x1^3 + x3"));
  EXPECT_TRUE(same(s.G(0, 0), "2") && same(s.G(1, 0), "0"));
}

TEST(Restrict, ManipulatorEquivalentToPrintedRestriction) {
  Dacs d = load_system(fixture("example52.dacs"));
  Settings st;
  Restriction r = restrict_system(d, reduce(d, st), st);
  EXPECT_EQ(r.system.l(), 4);
  EXPECT_EQ(r.system.n(), 5);
  EXPECT_EQ(r.kept_inputs, std::vector<std::string>{"Fx"});
  Dacs printed = parse_system(kPrintedRestriction);
  ExFbWitness w = identity_witness(r.system);
  w.Q = SymMatrix(4, 4);
  w.Q(0, 0) = Expr(1);
  w.Q(1, 1) = Expr(1);
  w.Q(1, 2) = Expr(1);
  w.Q(2, 3) = Expr(1);
  w.Q(3, 1) = Expr(1);
  EquivalenceReport rep = verify_ex_fb_equivalence(r.system, printed, w, st);
  EXPECT_EQ(rep.verdict, Verdict::Pass) << rep.text();
}

TEST(Restrict, OdeIsItsOwnRestriction) {
  Dacs d = parse_system("[states]\nx1 x2\n[inputs]\nu\n[point]\nx1=0 x2=0\n[E]\n1,0\n0,1\n[F]\nsin(x2)\nx1^2\n[G]\n0\n1\n");
  Settings st;
  Restriction r = restrict_system(d, reduce(d, st), st);
  EXPECT_EQ(r.m_star, 1);
  EXPECT_EQ(r.n_star, 2);
  EXPECT_EQ(verify_ex_fb_equivalence(d, r.system, identity_witness(d), st).verdict, Verdict::Pass);
}

TEST(Restrict, InputMapSatisfiesAlgebraicRows) {
  Dacs d = load_system(fixture("example52.dacs"));
  Settings st;
  Restriction r = restrict_system(d, reduce(d, st), st);
  // Residual of the original equations along M* for any z, z', u*:
  // E(x(z)) dx/dz z' - F - G u = -Q^-1 [E* z' - F* - G* u*; 0], so with z'
  // solved from the restricted system the residual vanishes.
  std::vector<Expr> emb;
  for (const auto& s : d.states) emb.push_back(r.embedding.at(s));
  SymMatrix jz = jacobian(emb, r.kept_states);
  std::vector<Expr> u;
  for (const auto& name : d.inputs) u.push_back(r.input_map.at(name));
  SymMatrix lhs = d.E.substituted(r.embedding) * jz;
  SymMatrix rhs = SymMatrix::column(d.F).substituted(r.embedding) + d.G.substituted(r.embedding) * SymMatrix::column(u);
  SymMatrix qlhs = r.Q * lhs, qrhs = r.Q * rhs;
  for (int i = r.r_star; i < d.l(); ++i) {
    EXPECT_TRUE(simplify(qrhs(i, 0)).is_zero()) << qrhs(i, 0).str();
    for (int j = 0; j < qlhs.cols(); ++j) EXPECT_TRUE(simplify(qlhs(i, j)).is_zero());
  }
  for (int i = 0; i < r.r_star; ++i) {
    EXPECT_TRUE(simplify(qrhs(i, 0) - r.system.F[static_cast<std::size_t>(i)] - r.system.G(i, 0) * parse_expr("Fx")).is_zero());
  }
}

TEST(Reduce, LinearPencilsMatchWongV) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dim(1, 5), inputs(0, 2), entry(-2, 2), coin(0, 2);
  for (int trial = 0; trial < 20; ++trial) {
    int l = dim(rng), n = dim(rng), m = inputs(rng);
    LinearDacs ld{QMatrix(l, n), QMatrix(l, n), QMatrix(l, m)};
    for (int i = 0; i < l; ++i) {
      for (int j = 0; j < n; ++j) {
        if (coin(rng)) ld.E(i, j) = entry(rng);
        if (coin(rng)) ld.H(i, j) = entry(rng);
      }
      for (int j = 0; j < m; ++j)
        if (coin(rng)) ld.L(i, j) = entry(rng);
    }
    Dacs d = to_dacs(ld);
    ReductionTrace t = reduce(d, Settings{});
    ASSERT_TRUE(t.admissible);
    std::vector<int> oracle = wong_v_dims(ld, static_cast<int>(t.steps.size()));
    for (std::size_t k = 0; k < t.steps.size(); ++k) EXPECT_EQ(t.steps[k].dim, oracle[k]) << "trial " << trial << " k " << k;
  }
}
