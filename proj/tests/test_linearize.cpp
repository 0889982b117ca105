// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#include <gtest/gtest.h>

#include <random>

#include "dacsfl/linearize.hpp"
#include "dacsfl/textfile.hpp"

using namespace dacsfl;

namespace {

std::string fixture(const std::string& name) { return std::string(DACSFL_FIXTURES) + "/" + name; }

QMatrix qm(std::initializer_list<std::initializer_list<int>> rows, int cols = -1) {
  int r = static_cast<int>(rows.size());
  int c = cols >= 0 ? cols : (r ? static_cast<int>(rows.begin()->size()) : 0);
  QMatrix m(r, c);
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (int v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

// Ratio of two expressions when it is a nonzero constant.
bool proportional(const Expr& a, const std::string& b) {
  Expr q = simplify(a / parse_expr(b));
  return q.is_number() && !q.is_zero();
}

DistributionSequence fake_sequence(const std::string& name, const std::vector<int>& ranks) {
  DistributionSequence s;
  s.name = name;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    DistributionLevel l;
    l.index = static_cast<int>(i) + 1;
    l.rank = ranks[i];
    s.levels.push_back(l);
  }
  return s;
}

// rho = max{i : D^_i != D_i}, rho_bar = max{i : D_{i-1} != D^_i}, single-chain case.
std::pair<int, int> single_chain_oracle(const std::vector<int>& d_hat, const std::vector<int>& d) {
  int rho = 0, rho_bar = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d_hat[i] != d[i]) rho = static_cast<int>(i) + 1;
    int prev = i == 0 ? 0 : d[i - 1];
    if (prev != d_hat[i]) rho_bar = static_cast<int>(i) + 1;
  }
  return {rho, rho_bar};
}

LinearDacs random_pencil(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(1, 5), inputs(0, 3), entry(-1, 1), sparse(0, 2);
  int l = dim(rng), n = dim(rng), m = inputs(rng);
  LinearDacs ld{QMatrix(l, n), QMatrix(l, n), QMatrix(l, m)};
  auto fill = [&](QMatrix& a) {
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j < a.cols(); ++j)
        if (sparse(rng) == 0) a(i, j) = entry(rng);
  };
  fill(ld.E);
  fill(ld.H);
  fill(ld.L);
  return ld;
}

}  // namespace

TEST(ChainIndices, FromRankJumps) {
  std::vector<int> dh{1, 3, 5, 5, 5}, d{2, 4, 5, 5, 5};
  Distributions dist{fake_sequence("D", d), fake_sequence("D^", dh)};
  ChainIndices idx = chain_indices(dist, 5, 1, 1);
  auto [rho, rho_bar] = single_chain_oracle(dh, d);
  EXPECT_EQ(idx.rho, std::vector<int>{rho});
  EXPECT_EQ(idx.rho_bar, std::vector<int>{rho_bar});
  EXPECT_EQ(idx.str(), "rho=(2), rho_bar=(3)");
}

TEST(ChainIndices, SingleChainOracleAgreement) {
  // every split n = rho + rho_bar of a one-u, one-v Brunovsky pair
  for (int rho = 1; rho <= 4; ++rho)
    for (int rho_bar = 1; rho_bar <= 4; ++rho_bar) {
      ChainIndices idx{{rho}, {rho_bar}};
      Explicitation b = brunovsky_explicitation(idx, Point());
      Settings st;
      Distributions dist = build_sequences(b, idx.size(), st);
      ChainIndices got = chain_indices(dist, idx.size(), 1, 1);
      EXPECT_EQ(got.rho, idx.rho);
      EXPECT_EQ(got.rho_bar, idx.rho_bar);
      std::vector<int> d, dh;
      for (int i = 1; i <= idx.size(); ++i) {
        d.push_back(dist.D.at(i).rank);
        dh.push_back(dist.D_hat.at(i).rank);
      }
      auto [r, rb] = single_chain_oracle(dh, d);
      EXPECT_EQ(r, rho);
      EXPECT_EQ(rb, rho_bar);
    }
}

TEST(ChainIndices, MultiChainBrunovsky) {
  ChainIndices idx{{3, 1}, {2, 2, 1}};
  Explicitation b = brunovsky_explicitation(idx, Point());
  Settings st;
  ChainIndices got = chain_indices(build_sequences(b, idx.size(), st), idx.size(), 2, 3);
  EXPECT_EQ(got.rho, idx.rho);
  EXPECT_EQ(got.rho_bar, idx.rho_bar);
}

TEST(ChainIndices, InconsistentCountsThrow) {
  Distributions dist{fake_sequence("D", {2, 4, 5}), fake_sequence("D^", {1, 3, 5})};
  EXPECT_THROW(chain_indices(dist, 5, 1, 1), Error);
  Distributions bumpy{fake_sequence("D", {1, 3}), fake_sequence("D^", {0, 2})};
  EXPECT_THROW(chain_indices(bumpy, 2, 1, 0), Error);
}

TEST(CanonicalTarget, AcademicExternal) {
  LinearDacs t = canonical_target(ChainIndices{{1}, {2}}, 2, 3);
  EXPECT_EQ(t.E, qm({{1, 0, 0}, {0, 1, 0}, {0, 0, 0}}));
  EXPECT_EQ(t.H, qm({{0, 0, 0}, {0, 0, 1}, {0, 0, 0}}));
  EXPECT_EQ(t.L, qm({{1, 0}, {0, 0}, {0, 1}}));
  auto printed = as_linear(load_system(fixture("example51_target.dacs")));
  ASSERT_TRUE(printed);
  EXPECT_EQ(t.E, printed->E);
  EXPECT_EQ(t.H, printed->H);
  EXPECT_EQ(t.L, printed->L);
}

TEST(CanonicalTarget, AcademicInternal) {
  LinearDacs t = canonical_target(ChainIndices{{1}, {2}});
  EXPECT_EQ(t.E, qm({{1, 0, 0}, {0, 1, 0}}));
  EXPECT_EQ(t.H, qm({{0, 0, 0}, {0, 0, 1}}));
  EXPECT_EQ(t.L, qm({{1}, {0}}));
}

TEST(CanonicalTarget, ManipulatorMatchesPrintedAfterPermutation) {
  // printed order: states (y1, y2, Ff, th1, th2), v-chain rows first
  QMatrix e = qm({{1, 0, 0, 0, 0}, {0, 1, 0, 0, 0}, {0, 0, 0, 1, 0}, {0, 0, 0, 0, 1}});
  QMatrix h = qm({{0, 1, 0, 0, 0}, {0, 0, 1, 0, 0}, {0, 0, 0, 0, 1}, {0, 0, 0, 0, 0}});
  QMatrix l = qm({{0}, {0}, {0}, {1}});
  const std::vector<int> cols{3, 4, 0, 1, 2}, rows{2, 3, 0, 1};
  auto permute = [&](const QMatrix& a, bool state_cols) {
    QMatrix out(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j < a.cols(); ++j)
        out(i, j) = a(rows[static_cast<std::size_t>(i)], state_cols ? cols[static_cast<std::size_t>(j)] : j);
    return out;
  };
  LinearDacs t = canonical_target(ChainIndices{{2}, {3}});
  EXPECT_EQ(t.E, permute(e, true));
  EXPECT_EQ(t.H, permute(h, true));
  EXPECT_EQ(t.L, permute(l, false));
}

TEST(CanonicalTarget, PureKernelDirection) {
  LinearDacs t = canonical_target(ChainIndices{{}, {1}});
  EXPECT_EQ(t.l(), 0);
  EXPECT_EQ(t.n(), 1);
  EXPECT_EQ(t.m(), 0);
  EXPECT_TRUE(is_completely_controllable(t).controllable);
}

TEST(CanonicalTarget, AlwaysControllable) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> count(0, 2), len(1, 3), extra(0, 2), pad(0, 1);
  for (int trial = 0; trial < 30; ++trial) {
    ChainIndices idx;
    int a = count(rng), b = count(rng);
    if (a + b == 0) a = 1;
    for (int i = 0; i < a; ++i) idx.rho.push_back(len(rng));
    for (int i = 0; i < b; ++i) idx.rho_bar.push_back(len(rng));
    std::sort(idx.rho.rbegin(), idx.rho.rend());
    std::sort(idx.rho_bar.rbegin(), idx.rho_bar.rend());
    int m = a + extra(rng);
    int l = idx.size() - b + (m - a) + pad(rng);
    LinearDacs t = canonical_target(idx, m, l);
    ControllabilityReport rep = is_completely_controllable(t);
    EXPECT_TRUE(rep.controllable) << idx.str();
    EXPECT_TRUE(rep.rank_criterion) << idx.str() << " " << rep.evidence;
  }
  EXPECT_TRUE(is_completely_controllable(canonical_target(ChainIndices{{2}, {2}})).controllable);
}

TEST(Wong, AcademicTargetIsControllable) {
  LinearDacs t = canonical_target(ChainIndices{{1}, {2}}, 2, 3);
  WongSequences w = wong_sequences(t);
  EXPECT_EQ(rank(subspace_intersection(w.V_star, w.W_star)), 3);
}

TEST(Wong, IdentityPencil) {
  LinearDacs ld{QMatrix::identity(3), QMatrix(3, 3), QMatrix::identity(3)};
  WongSequences w = wong_sequences(ld);
  EXPECT_EQ(rank(w.W[1]), 3);
  for (const auto& v : w.V) EXPECT_EQ(rank(v), 3);
  EXPECT_TRUE(is_completely_controllable(ld).controllable);
}

TEST(Wong, NilpotentPencilNotControllable) {
  LinearDacs ld{qm({{0, 1, 0}, {0, 0, 1}, {0, 0, 0}}), QMatrix::identity(3), QMatrix(3, 0)};
  WongSequences w = wong_sequences(ld);
  // W_1 = ker N, W_{i+1} = N^-1(W_i) grows to R^3 while V_i shrinks to 0
  EXPECT_EQ(rank(w.W_star), 3);
  EXPECT_EQ(rank(w.V_star), 0);
  ControllabilityReport rep = is_completely_controllable(ld);
  EXPECT_FALSE(rep.controllable);
  EXPECT_FALSE(rep.rank_criterion);
  LinearDacs swapped{QMatrix::identity(3), ld.E, QMatrix(3, 0)};
  EXPECT_EQ(rank(wong_sequences(swapped).W_star), 0);
  EXPECT_FALSE(is_completely_controllable(swapped).controllable);
}

TEST(Wong, NoInputsNotControllable) {
  LinearDacs ld{QMatrix::identity(2), QMatrix(2, 2), QMatrix(2, 0)};
  ControllabilityReport rep = is_completely_controllable(ld);
  EXPECT_FALSE(rep.controllable);
  EXPECT_FALSE(rep.rank_criterion);
}

TEST(Wong, PencilEigenvalueDetected) {
  // x1' = 2 x1 is decoupled from the input
  LinearDacs ld{QMatrix::identity(2), qm({{2, 0}, {0, 0}}), qm({{0}, {1}})};
  ControllabilityReport rep = is_completely_controllable(ld);
  EXPECT_FALSE(rep.controllable);
  EXPECT_TRUE(rep.image_condition);
  EXPECT_FALSE(rep.pencil_condition);
}

TEST(Wong, RandomPencilProperties) {
  std::mt19937_64 rng(11);
  int controllable = 0;
  for (int trial = 0; trial < 50; ++trial) {
    LinearDacs ld = random_pencil(rng);
    WongSequences w = wong_sequences(ld);
    const int n = ld.n();
    EXPECT_LE(static_cast<int>(w.V.size()), n + 3);
    for (std::size_t i = 1; i < w.V.size(); ++i) {
      EXPECT_TRUE(subspace_contains(w.V[i - 1], w.V[i]));
      EXPECT_TRUE(subspace_contains(w.W[i], w.W[i - 1]));
      EXPECT_TRUE(subspace_contains(w.W_hat[i], w.W_hat[i - 1]));
      EXPECT_TRUE(subspace_contains(w.W_hat[i - 1], w.W[i - 1]));
    }
    ControllabilityReport rep = is_completely_controllable(ld, static_cast<std::uint64_t>(trial + 1));
    EXPECT_EQ(rep.controllable, rep.rank_criterion) << "trial " << trial << ": " << rep.evidence;
    controllable += rep.controllable;
  }
  EXPECT_GT(controllable, 0);
  EXPECT_LT(controllable, 50);
}

TEST(Wong, ReductionMatchesConstraintSubspaces) {
  std::mt19937_64 rng(5);
  Settings st;
  int compared = 0;
  for (int trial = 0; trial < 20; ++trial) {
    LinearDacs ld = random_pencil(rng);
    ReductionTrace t = reduce(to_dacs(ld), st);
    WongSequences w = wong_sequences(ld);
    for (const auto& step : t.steps) {
      std::size_t k = static_cast<std::size_t>(step.k);
      int expected = rank(k < w.V.size() ? w.V[k] : w.V_star);
      EXPECT_EQ(step.dim, expected) << "trial " << trial << " step " << k;
      ++compared;
    }
  }
  EXPECT_GT(compared, 20);
}

TEST(Construct, IdentityOnBrunovskyForm) {
  ChainIndices idx{{2}, {1}};
  Point p;
  for (const auto& s : canonical_states(idx)) p.set(s, 0.25);
  Explicitation b = brunovsky_explicitation(idx, p);
  Settings st;
  Transform t = construct_transform(b, idx, {{parse_expr("xi1")}, {parse_expr("z1")}}, st);
  ASSERT_EQ(t.psi.size(), 3u);
  EXPECT_EQ(t.psi[0].str(), "xi1");
  EXPECT_EQ(t.psi[1].str(), "xi2");
  EXPECT_EQ(t.psi[2].str(), "z1");
  EXPECT_TRUE(t.witness.alpha_u[0].is_zero());
  EXPECT_TRUE(t.witness.beta_u(0, 0).is_one());
  EXPECT_TRUE(t.witness.beta_v(0, 0).is_one());
  EXPECT_EQ(t.verification.verdict, Verdict::Pass);
}

TEST(Construct, AcademicPoolRecoversOutputs) {
  Explicitation e = parse_explicitation(read_file(fixture("example51_sigma.expl")));
  Settings st;
  Transform t = construct_transform(e, ChainIndices{{1}, {2}}, {}, st);
  EXPECT_TRUE(t.from_pool);
  ASSERT_EQ(t.h_u.size(), 1u);
  ASSERT_EQ(t.h_v.size(), 1u);
  EXPECT_TRUE(proportional(t.h_u[0], "x1*x2")) << t.h_u[0].str();
  EXPECT_TRUE(proportional(t.h_v[0], "x1 + x3")) << t.h_v[0].str();
  ASSERT_EQ(t.psi.size(), 3u);
  EXPECT_TRUE(simplify(t.psi[2] - parse_expr("-x1^3 + x2^2 + x3")).is_zero()) << t.psi[2].str();
  EXPECT_EQ(t.verification.verdict, Verdict::Pass) << t.verification.text();
}

TEST(Construct, AcademicUserCandidatesGiveTriangularFeedback) {
  Explicitation e = parse_explicitation(read_file(fixture("example51_sigma.expl")));
  Settings st;
  Transform t = construct_transform(e, ChainIndices{{1}, {2}}, {{parse_expr("x1*x2")}, {parse_expr("x1+x3")}}, st);
  EXPECT_FALSE(t.from_pool);
  // b^u = L_{g_u} (x1 x2) = 2 and b^v = L_{g_v} L_f (x1 + x3)
  EXPECT_TRUE(simplify(t.b_u(0, 0) - Expr(2)).is_zero()) << t.b_u.str();
  EXPECT_TRUE(simplify(t.b_v(0, 0) - parse_expr("-3*x1^3 - x1 - 2*x2^2")).is_zero()) << t.b_v.str();
  EXPECT_TRUE(simplify(t.lambda_t(0, 0) - parse_expr("4*x2/x1")).is_zero()) << t.lambda_t.str();
  EXPECT_TRUE(simplify(t.a_v[0] - parse_expr("x2^2 - x1^3 + x3")).is_zero()) << t.a_v[0].str();
  EXPECT_EQ(t.verification.verdict, Verdict::Pass);
}

TEST(Construct, RejectedCandidatesAreListed) {
  Explicitation e = parse_explicitation(read_file(fixture("example51_sigma.expl")));
  Settings st;
  try {
    construct_transform(e, ChainIndices{{1}, {2}}, {{parse_expr("x1")}, {parse_expr("x1+x3")}}, st);
    FAIL() << "expected an error";
  } catch (const Error& err) {
    std::string msg = err.what();
    EXPECT_NE(msg.find("construction needs user candidates"), std::string::npos) << msg;
    EXPECT_NE(msg.find("x1: nonzero <dh, ad_f^0 g_v1>"), std::string::npos) << msg;
  }
}

TEST(Construct, MultiChainNeedsCandidates) {
  ChainIndices idx{{1, 1}, {1}};
  Point p;
  for (const auto& s : canonical_states(idx)) p.set(s, 0.0);
  Explicitation b = brunovsky_explicitation(idx, p);
  Settings st;
  EXPECT_THROW(construct_transform(b, idx, {}, st), Error);
  Transform t = construct_transform(b, idx, {{parse_expr("xi2"), parse_expr("xi1")}, {parse_expr("z1")}}, st);
  EXPECT_EQ(t.verification.verdict, Verdict::Pass);
}

TEST(Linearize, AcademicExternalPasses) {
  Dacs d = load_system(fixture("example51.dacs"));
  Settings st;
  LinearizationReport rep = check_external(d, st);
  EXPECT_EQ(rep.verdict, Verdict::Pass) << rep.text();
  EXPECT_TRUE(rep.linearizable);
  EXPECT_EQ(rep.summary(), "externally feedback linearizable, rho=(1), rho_bar=(2)");
  ASSERT_GE(rep.conditions.size(), 3u);
  EXPECT_EQ(rep.conditions[0].evidence, "rank E = 2 (constant), rank [E,G] = 3 (constant)");
  ASSERT_TRUE(rep.target);
  auto printed = as_linear(load_system(fixture("example51_target.dacs")));
  EXPECT_EQ(rep.target->E, printed->E);
  EXPECT_EQ(rep.target->H, printed->H);
  EXPECT_EQ(rep.target->L, printed->L);
  ASSERT_TRUE(rep.dacs_check);
  EXPECT_EQ(rep.dacs_check->verdict, Verdict::Pass) << rep.dacs_check->text();
}

TEST(Linearize, AcademicInternalPasses) {
  Dacs d = load_system(fixture("example51.dacs"));
  Settings st;
  LinearizationReport rep = check_internal(d, st);
  EXPECT_EQ(rep.verdict, Verdict::Pass) << rep.text();
  EXPECT_EQ(rep.summary(), "internally feedback linearizable, rho=(1), rho_bar=(2)");
}

TEST(Linearize, ManipulatorExternalFailsAtEfl2) {
  Dacs d = load_system(fixture("example52.dacs"));
  Settings st;
  LinearizationReport rep = check_external(d, st);
  EXPECT_EQ(rep.verdict, Verdict::Fail);
  EXPECT_EQ(rep.conditions[0].verdict, Verdict::Pass);
  EXPECT_EQ(rep.conditions[1].name, "EFL2");
  EXPECT_EQ(rep.conditions[1].verdict, Verdict::Fail);
  EXPECT_EQ(rep.summary(), "not externally feedback linearizable: EFL2 fails");
}

TEST(Linearize, ManipulatorInternalWithCandidates) {
  Dacs d = load_system(fixture("example52.dacs"));
  Settings st;
  std::vector<std::string> symbols = d.states;
  for (const auto& [k, v] : d.params) symbols.push_back(k);
  CandidateSet c = load_candidates(fixture("example52_candidates.txt"), symbols);
  LinearizationReport rep = check_internal(d, st, c);
  EXPECT_EQ(rep.verdict, Verdict::Pass) << rep.text();
  ASSERT_TRUE(rep.indices);
  EXPECT_EQ(rep.indices->rho, std::vector<int>{2});
  EXPECT_EQ(rep.indices->rho_bar, std::vector<int>{3});
  ASSERT_TRUE(rep.transform);
  EXPECT_EQ(rep.transform->verification.verdict, Verdict::Pass);
  for (const auto& r : rep.transform->verification.relations) EXPECT_LE(r.max_residual, 1e-8) << r.name;
  EXPECT_TRUE(rep.linearizable);
  EXPECT_EQ(rep.target->E, canonical_target(ChainIndices{{2}, {3}}).E);
}

TEST(Linearize, ManipulatorWithoutCandidatesIsUndecided) {
  Dacs d = load_system(fixture("example52.dacs"));
  Settings st;
  LinearizationReport rep = check_internal(d, st);
  EXPECT_EQ(rep.verdict, Verdict::Undecided);
  EXPECT_NE(rep.transform_error.find("construction needs user candidates"), std::string::npos);
}

TEST(Linearize, NonInvolutiveFails) {
  Dacs d = load_system(fixture("ode_noninvolutive.dacs"));
  Settings st;
  LinearizationReport rep = check_internal(d, st);
  EXPECT_EQ(rep.verdict, Verdict::Fail);
  ASSERT_EQ(rep.conditions.size(), 3u);
  EXPECT_EQ(rep.conditions[1].verdict, Verdict::Pass);
  EXPECT_EQ(rep.conditions[2].verdict, Verdict::Fail);
  EXPECT_NE(rep.conditions[2].evidence.find("[g_u1, g_u2]"), std::string::npos) << rep.conditions[2].evidence;
}

TEST(Linearize, OdeChainPasses) {
  Dacs d = load_system(fixture("ode_chain.dacs"));
  Settings st;
  LinearizationReport rep = check_external(d, st);
  EXPECT_EQ(rep.verdict, Verdict::Pass) << rep.text();
  EXPECT_EQ(rep.indices->rho, std::vector<int>{2});
  EXPECT_TRUE(rep.indices->rho_bar.empty());
  EXPECT_TRUE(proportional(rep.transform->h_u[0], "x1"));
}

TEST(Linearize, OdeRankDeficientFails) {
  Dacs d = load_system(fixture("ode_rank_deficient.dacs"));
  Settings st;
  LinearizationReport rep = check_external(d, st);
  EXPECT_EQ(rep.verdict, Verdict::Fail);
}

TEST(Linearize, IndicesInvariantUnderFeedback) {
  Explicitation e = parse_explicitation(read_file(fixture("example51_sigma.expl")));
  Settings st;
  Transform t = construct_transform(e, ChainIndices{{1}, {2}}, {}, st);
  ASSERT_EQ(t.verification.verdict, Verdict::Pass);
  Explicitation b = brunovsky_explicitation(ChainIndices{{1}, {2}}, Point());
  ChainIndices before = chain_indices(build_sequences(e, 3, st), 3, 1, 1);
  ChainIndices after = chain_indices(build_sequences(b, 3, st), 3, 1, 1);
  EXPECT_EQ(before.rho, after.rho);
  EXPECT_EQ(before.rho_bar, after.rho_bar);
}

TEST(Linearize, DocumentIsDeterministic) {
  Dacs d = load_system(fixture("example51.dacs"));
  Settings st;
  std::string a = check_external(d, st).document();
  std::string b = check_external(d, st).document();
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("\"verdict\": \"PASS\""), std::string::npos);
  EXPECT_NE(a.find("[E]"), std::string::npos);
}

TEST(Candidates, ParseSections) {
  CandidateSet c = parse_candidates("[candidates_u]\nx1*x2\n[candidates_v]\nx1 + x3\nx2\n", {"x1", "x2", "x3"});
  EXPECT_EQ(c.u.size(), 1u);
  EXPECT_EQ(c.v.size(), 2u);
  EXPECT_THROW(parse_candidates("[candidates_u]\ny\n", {"x1"}), Error);
  EXPECT_THROW(parse_candidates("[other]\nx1\n", {"x1"}), Error);
}

TEST(Candidates, PoolShape) {
  auto pool = heuristic_pool({"a", "b", "c"});
  EXPECT_EQ(pool.size(), 3u + 3u + 3u + 6u);
  std::vector<std::string> many;
  for (int i = 0; i < 40; ++i) many.push_back("x" + std::to_string(i));
  EXPECT_EQ(heuristic_pool(many).size(), 500u);
}
