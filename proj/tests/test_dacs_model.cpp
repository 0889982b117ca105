// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#include <gtest/gtest.h>

#include "dacsfl/dacs_model.hpp"

using namespace dacsfl;

namespace {

std::string fixture(const std::string& name) { return std::string(DACSFL_FIXTURES) + "/" + name; }

const char* kSmall = R"(
[states]
x1 x2
[inputs]
u1
[point]
x1=1 x2=0
[E]
1, 0
0, 0
[F]
x2
x1 - 1
[G]
%G%
)";

std::string with_g(const std::string& g) {
  std::string s = kSmall;
  return s.replace(s.find("%G%"), 3, g);
}

}  // namespace

TEST(LoadSystem, Academic) {
  Dacs d = load_system(fixture("example51.dacs"));
  EXPECT_EQ(d.l(), 3);
  EXPECT_EQ(d.n(), 3);
  EXPECT_EQ(d.m(), 2);
  EXPECT_DOUBLE_EQ(d.point.at("x1"), 1.0);
  EXPECT_DOUBLE_EQ(d.point.at("x2"), 0.0);
  EXPECT_DOUBLE_EQ(d.point.at("x3"), 0.0);
}

TEST(LoadSystem, Manipulator) {
  Dacs d = load_system(fixture("example52.dacs"));
  EXPECT_EQ(d.l(), 7);
  EXPECT_EQ(d.n(), 7);
  EXPECT_EQ(d.m(), 2);
  EXPECT_DOUBLE_EQ(d.point.at("l"), 0.5);
}

TEST(LoadSystem, WrongGHeight) {
  try {
    parse_system(with_g("0\n1\n1"), "small.dacs");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Dimension);
    EXPECT_NE(std::string(e.what()).find("small.dacs:"), std::string::npos);
  }
}

TEST(LoadSystem, UndeclaredIdentifier) {
  try {
    parse_system(with_g("0\nu1"), "small.dacs");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownIdentifier);
    EXPECT_NE(std::string(e.what()).find("small.dacs:16"), std::string::npos) << e.what();
  }
}

TEST(LoadSystem, FormatRoundTrip) {
  for (const char* f : {"example51.dacs", "example52.dacs"}) {
    Dacs d = load_system(fixture(f));
    Dacs r = parse_system(format_system(d));
    EXPECT_EQ(format_system(r), format_system(d));
    EXPECT_TRUE((r.E - d.E).is_structurally_zero());
  }
}

TEST(AsLinear, TargetAndNonlinear) {
  auto ld = as_linear(load_system(fixture("example51_target.dacs")));
  ASSERT_TRUE(ld.has_value());
  EXPECT_EQ(ld->H(1, 2), 1);
  EXPECT_EQ(rank(ld->E), 2);
  EXPECT_FALSE(as_linear(load_system(fixture("example51.dacs"))).has_value());
  Dacs back = to_dacs(*ld);
  auto again = as_linear(back);
  ASSERT_TRUE(again.has_value());
  EXPECT_TRUE(again->E == ld->E && again->H == ld->H && again->L == ld->L);
}

TEST(ExFb, AcademicWitnessPasses) {
  Dacs a = load_system(fixture("example51.dacs"));
  Dacs b = load_system(fixture("example51_target.dacs"));
  ExFbWitness w = load_witness(fixture("example51_witness.txt"), a);
  EquivalenceReport rep = verify_ex_fb_equivalence(a, b, w, Settings{});
  EXPECT_EQ(rep.verdict, Verdict::Pass) << rep.text();
  for (const auto& r : rep.relations) EXPECT_TRUE(r.symbolic) << r.name;
}

TEST(ExFb, LiteralPrintedFeedbackFailsGRelation) {
  Dacs a = load_system(fixture("example51.dacs"));
  Dacs b = load_system(fixture("example51_target.dacs"));
  ExFbWitness w = load_witness(fixture("example51_witness.txt"), a);
  w.beta_u(1, 0) = Expr(-1);
  EquivalenceReport rep = verify_ex_fb_equivalence(a, b, w, Settings{});
  EXPECT_EQ(rep.relations[0].verdict, Verdict::Pass);
  EXPECT_EQ(rep.relations[1].verdict, Verdict::Pass);
  EXPECT_EQ(rep.relations[2].verdict, Verdict::Fail);
}

TEST(ExFb, Reflexive) {
  for (const char* f : {"example51.dacs", "example52.dacs"}) {
    Dacs a = load_system(fixture(f));
    EXPECT_EQ(verify_ex_fb_equivalence(a, a, identity_witness(a), Settings{}).verdict, Verdict::Pass);
  }
}

TEST(ExFb, PerturbedFFailsOnF) {
  Dacs a = load_system(fixture("example51.dacs"));
  Dacs b = a;
  b.F[1] = b.F[1] + Expr(1);
  EquivalenceReport rep = verify_ex_fb_equivalence(a, b, identity_witness(a), Settings{});
  EXPECT_EQ(rep.verdict, Verdict::Fail);
  EXPECT_EQ(rep.relations[0].verdict, Verdict::Pass);
  EXPECT_EQ(rep.relations[1].verdict, Verdict::Fail);
  EXPECT_EQ(rep.relations[2].verdict, Verdict::Pass);
}

TEST(ExFb, SingularWitnessRejected) {
  Dacs a = load_system(fixture("example51.dacs"));
  ExFbWitness w = identity_witness(a);
  w.Q(0, 0) = Expr(0);
  EXPECT_THROW(verify_ex_fb_equivalence(a, a, w, Settings{}), Error);
}

// Inverse witness evaluated numerically: at sampled target points, the
// relations of (b, a, w^-1) hold with x = psi^-1(x~) found by Newton.
TEST(ExFb, InverseWitnessHoldsAtMappedPoints) {
  Dacs a = load_system(fixture("example51.dacs"));
  Dacs b = load_system(fixture("example51_target.dacs"));
  ExFbWitness w = load_witness(fixture("example51_witness.txt"), a);
  Neighborhood nb = neighborhood(b, Settings{});
  SymMatrix jpsi = jacobian(w.psi, a.states);
  int checked = 0;
  for (int s = 0; s < 16; ++s) {
    const Point& xt = nb.samples()[static_cast<std::size_t>(s)];
    std::vector<double> target;
    for (const auto& n : b.states) target.push_back(xt.at(n));
    auto x = invert_map(w.psi, a.states, a.point, target, {1.0, 0.0, 0.0});
    ASSERT_TRUE(x.has_value());
    Point px = a.point;
    for (int i = 0; i < a.n(); ++i) px.set(a.states[static_cast<std::size_t>(i)], (*x)[static_cast<std::size_t>(i)]);
    Eigen::MatrixXd qinv = w.Q.evaluate(px).inverse();
    Eigen::MatrixXd binv = w.beta_u.evaluate(px).inverse();
    // E(x) = Q^-1 E~(x~) (dpsi^-1/dx~)^-1, with (dpsi^-1/dx~)^-1 = dpsi/dx.
    Eigen::MatrixXd e_rel = a.E.evaluate(px) - qinv * b.E.evaluate(xt) * jpsi.evaluate(px);
    Eigen::MatrixXd g_rel = a.G.evaluate(px) - qinv * b.G.evaluate(xt) * binv;
    Eigen::VectorXd f_rel = SymMatrix::column(a.F).evaluate(px) -
                            qinv * SymMatrix::column(b.F).evaluate(xt) +
                            a.G.evaluate(px) * SymMatrix::column(w.alpha_u).evaluate(px);
    EXPECT_LT(e_rel.cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT(g_rel.cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT(f_rel.cwiseAbs().maxCoeff(), 1e-8);
    int ra = numeric_rank(a.E.evaluate(px), 1e-8, 1e-10);
    int rb = numeric_rank(b.E.evaluate(xt), 1e-8, 1e-10);
    EXPECT_EQ(ra, rb);
    ++checked;
  }
  EXPECT_EQ(checked, 16);
}
