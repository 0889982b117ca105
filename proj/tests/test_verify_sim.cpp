// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#include <gtest/gtest.h>

#include <cmath>

#include "dacsfl/linearize.hpp"
#include "dacsfl/textfile.hpp"
#include "dacsfl/verify_sim.hpp"

using namespace dacsfl;

namespace {

std::string fixture(const std::string& name) { return std::string(DACSFL_FIXTURES) + "/" + name; }

struct Pipeline {
  Dacs d;
  Restriction r;
  Explicitation e;
  ChainIndices idx;
  Transform t;
  Explicitation target;
};

Pipeline pipeline(const std::string& name, const CandidateSet& c = {}) {
  Settings st;
  Pipeline p;
  p.d = load_system(fixture(name));
  p.r = restrict_system(p.d, reduce(p.d, st), st);
  p.e = explicitate(p.r.system, st);
  p.idx = chain_indices(build_sequences(p.e, p.r.n_star, st), p.r.n_star, p.r.m_star, p.e.s());
  p.t = construct_transform(p.e, p.idx, c, st);
  p.target = brunovsky_explicitation(p.idx, Point());
  return p;
}

CandidateSet manipulator_candidates(const Dacs& d) {
  std::vector<std::string> symbols = d.states;
  for (const auto& [k, v] : d.params) symbols.push_back(k);
  return load_candidates(fixture("example52_candidates.txt"), symbols);
}

Explicitation scalar_ode(const std::string& rhs) {
  return parse_explicitation("[states]\nx\n[point]\nx=1\n[f]\n" + rhs + "\n");
}

SimOptions options(double t_end, double step) {
  SimOptions o;
  o.t_end = t_end;
  o.step = step;
  return o;
}

}  // namespace

TEST(Simulate, ExponentialClosedForm) {
  Point x0;
  x0.set("x", 1.0);
  Trajectory tr = simulate_explicitation(scalar_ode("x"), x0, {}, {}, options(1.0, 1e-3));
  EXPECT_NEAR(tr.x.back()[0], std::exp(1.0), 1e-8);
  EXPECT_NEAR(tr.t.back(), 1.0, 1e-12);
  EXPECT_FALSE(tr.truncation_flag);
}

TEST(Simulate, ZeroFieldIsConstant) {
  Point x0;
  x0.set("x", 0.3);
  Trajectory tr = simulate_explicitation(scalar_ode("0"), x0, {}, {}, options(0.5, 1e-2));
  for (const auto& x : tr.x) EXPECT_EQ(x[0], 0.3);
}

TEST(Simulate, AcademicExplicitationIsFinite) {
  Explicitation e = parse_explicitation(read_file(fixture("example51_sigma.expl")));
  Point x0 = e.point;
  Trajectory tr = simulate_explicitation(e, x0, {parse_expr("1/10*sin(t)")}, {Expr(0)}, options(0.5, 1e-3));
  EXPECT_EQ(tr.size(), 501u);
  for (const auto& x : tr.x)
    for (double v : x) EXPECT_TRUE(std::isfinite(v));
  EXPECT_FALSE(tr.truncation_flag) << tr.truncation_estimate;
  EXPECT_NEAR(tr.u[100][0], 0.1 * std::sin(0.1), 1e-15);
}

TEST(Simulate, BlowUpAndSingularityReported) {
  Point x0;
  x0.set("x", 1.0);
  EXPECT_THROW(simulate_explicitation(scalar_ode("x^2"), x0, {}, {}, options(2.0, 1e-3)), Error);
  x0.set("x", 0.0);
  EXPECT_THROW(simulate_explicitation(scalar_ode("1/x"), x0, {}, {}, options(0.1, 1e-3)), Error);
}

TEST(Simulate, CsvHeader) {
  Explicitation e = parse_explicitation(read_file(fixture("example51_sigma.expl")));
  Trajectory tr = simulate_explicitation(e, e.point, {Expr(0)}, {Expr(0)}, options(0.01, 1e-3));
  std::string csv = trajectory_csv(tr);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x1,x2,x3,u1,v");
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), tr.size() + 1);
}

TEST(Residual, ExplicitationSolvesItsSystem) {
  Pipeline p = pipeline("example51.dacs");
  Trajectory tr = simulate_explicitation(p.e, p.e.point, {parse_expr("1/10*sin(t)")}, {parse_expr("1/5*cos(t)")},
                                         options(0.5, 1e-3));
  EXPECT_LE(dacs_residual(p.r.system, tr), 1e-5);
  Trajectory lifted = lift_to_system(tr, p.r, p.d);
  EXPECT_LE(dacs_residual(p.d, lifted), 1e-5);
}

TEST(Residual, EquilibriumIsExact) {
  Dacs d = load_system(fixture("example51.dacs"));
  // F(1, 0, 1) = 0 with u = 0
  Trajectory tr;
  tr.states = d.states;
  tr.inputs = d.inputs;
  for (int k = 0; k < 10; ++k) {
    tr.t.push_back(k * 0.01);
    tr.x.push_back({1.0, 0.0, 1.0});
    tr.u.push_back({0.0, 0.0});
  }
  EXPECT_LE(dacs_residual(d, tr), 1e-12);
}

TEST(Residual, OtherSystemDetected) {
  Explicitation e = parse_explicitation(read_file(fixture("example51_sigma.expl")));
  e.f[2] = e.f[2] + Expr(1);
  Pipeline p = pipeline("example51.dacs");
  Trajectory tr = simulate_explicitation(e, e.point, {Expr(0)}, {Expr(0)}, options(0.5, 1e-3));
  EXPECT_GT(dacs_residual(p.r.system, tr), 1e-2);
}

TEST(Residual, ShortTrajectoryRejected) {
  Dacs d = load_system(fixture("example51.dacs"));
  Trajectory tr;
  tr.states = d.states;
  tr.inputs = d.inputs;
  EXPECT_THROW(dacs_residual(d, tr), Error);
}

TEST(Correspondence, IdentityIsZero) {
  Explicitation e = parse_explicitation(read_file(fixture("example51_sigma.expl")));
  MatchedRun run = simulate_matched(e, e, identity_sys_witness(e), e.point, {parse_expr("sin(t)")},
                                    {parse_expr("t")}, options(0.5, 1e-3));
  EXPECT_EQ(run.correspondence.state_deviation, 0.0);
  EXPECT_EQ(run.correspondence.input_residual, 0.0);
}

TEST(Correspondence, AcademicMatchesBrunovsky) {
  Pipeline p = pipeline("example51.dacs");
  MatchedRun run = simulate_matched(p.e, p.target, p.t.witness, p.e.point, {parse_expr("1/10*sin(t)")},
                                    {parse_expr("1/5*cos(2*t)")}, options(0.5, 1e-4));
  EXPECT_LE(run.correspondence.state_deviation, 1e-6);
  EXPECT_LE(run.correspondence.input_residual, 1e-9);
  EXPECT_LE(dacs_residual(p.d, lift_to_system(run.source, p.r, p.d)), 1e-5);
}

TEST(Correspondence, ManipulatorMatchesBrunovsky) {
  Dacs d = load_system(fixture("example52.dacs"));
  Pipeline p = pipeline("example52.dacs", manipulator_candidates(d));
  Point x0 = p.e.point;
  x0.set("th1", 0.03);
  x0.set("Ff", -0.02);
  MatchedRun run = simulate_matched(p.e, p.target, p.t.witness, x0, {parse_expr("1/10*sin(t)")},
                                    {parse_expr("1/10*cos(t)")}, options(0.5, 1e-4));
  EXPECT_LE(run.correspondence.state_deviation, 1e-6);
  Trajectory lifted = lift_to_system(run.source, p.r, p.d);
  EXPECT_LE(dacs_residual(p.d, lifted), 1e-5);
  EXPECT_LE(constraint_drift(lifted, p.r.constraints, p.d), 1e-6);
}

TEST(Correspondence, StepRefinementConverges) {
  Pipeline p = pipeline("example51.dacs");
  auto deviation = [&](double step) {
    return simulate_matched(p.e, p.target, p.t.witness, p.e.point, {parse_expr("sin(3*t)")}, {parse_expr("cos(2*t)")},
                            options(0.5, step))
        .correspondence.state_deviation;
  };
  double coarse = deviation(0.1), fine = deviation(0.05);
  EXPECT_GT(coarse, 1e-12);
  EXPECT_GE(coarse / fine, 8.0) << coarse << " " << fine;
}
