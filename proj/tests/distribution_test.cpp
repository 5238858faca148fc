#include <gtest/gtest.h>

#include "dfipp/distribution.hpp"
#include "dfipp/language.hpp"

using namespace dfipp;

namespace {
Rational q(long a, long b) { return Rational(a, b); }
}  // namespace

TEST(Pmf, RejectsBadMasses) {
  EXPECT_THROW(Pmf({2}, {q(1, 2), q(1, 3)}), std::invalid_argument);
  EXPECT_THROW(Pmf({2}, {q(3, 2), q(-1, 2)}), std::invalid_argument);
  EXPECT_THROW(Pmf({3}, {q(1, 2), q(1, 2)}), std::invalid_argument);
  EXPECT_EQ(Pmf::from_weights({3}, {1, 1, 2}), Pmf({3}, {q(1, 4), q(1, 4), q(1, 2)}));
}

TEST(Granularise, FrozenValues) {
  EXPECT_EQ(granularise(Pmf({2}, {q(1, 2), q(1, 2)})).counts, (std::vector<uint64_t>{8, 8, 0}));
  EXPECT_EQ(granularise(Pmf::point({2}, 0)).counts, (std::vector<uint64_t>{14, 2, 0}));
  EXPECT_EQ(granularise(Pmf::uniform({3})).counts, (std::vector<uint64_t>{8, 8, 8, 0}));
  // 6*4*(1/8) = 3 -> 5, 6*4*(3/8) = 9 -> 11
  auto B = granularise(Pmf({4}, {q(1, 8), q(3, 8), q(1, 4), q(1, 4)}));
  EXPECT_EQ(B.counts, (std::vector<uint64_t>{5, 11, 8, 8, 0}));
  EXPECT_EQ(B.total(), 32u);
}

TEST(Granularise, SubProbabilityClaims) {
  auto B = granularise_masses({q(1, 4), q(1, 4)});
  EXPECT_EQ(B.counts, (std::vector<uint64_t>{5, 5, 6}));
  EXPECT_THROW(granularise_masses({q(3, 4), q(3, 4)}), std::invalid_argument);
}

TEST(Marginal, FirstCoordinate) {
  Pmf D({2, 2}, {q(1, 10), q(3, 10), q(2, 10), q(4, 10)});
  // sums out the row coordinate
  EXPECT_EQ(marginal_first(D), Pmf({2}, {q(3, 10), q(7, 10)}));
}

TEST(Tv, L1Form) {
  EXPECT_EQ(tv_distance(Pmf::point({3}, 0), Pmf::point({3}, 2)), Rational(2));
  EXPECT_EQ(tv_distance(Pmf::uniform({2}), Pmf({2}, {q(3, 4), q(1, 4)})), q(1, 2));
  EXPECT_EQ(tv_distance(Pmf::uniform({4}), Pmf::uniform({4})), Rational(0));
}

TEST(Circuit, AndGateDistribution) {
  SamplingCircuit c(2, {Gate{GateOp::And, 0, 1}}, {2});
  EXPECT_EQ(circuit_pmf(c, {2}), Pmf({2}, {q(3, 4), q(1, 4)}));
  // outputs read most significant first
  SamplingCircuit pair(2, {}, {0, 1});
  EXPECT_EQ(pair.eval(0b01), 0b10u);
  EXPECT_EQ(pair.project(1, 1).eval(0b10), 1u);
}

TEST(Dispersion, FrozenValues) {
  EXPECT_EQ(dispersion_rho(Pmf({2}, {q(3, 4), q(1, 4)})).rho, q(3, 2));
  EXPECT_EQ(dispersion_rho(Pmf::uniform({3, 3})).rho, Rational(1));
  // line through a zero-sum line is skipped
  Pmf D({2, 2}, {q(1, 2), q(1, 2), 0, 0});
  auto rep = dispersion_rho(D);
  EXPECT_EQ(rep.rho, Rational(2));
}

TEST(Extend, RowOrderForEightEight) {
  PrimeField f(5);
  InputTensor X(f, {2, 1}, {Fe{1}, Fe{2}});
  GranularitySet B{{8, 8, 0}};
  auto rows = extension_rows(B);
  ASSERT_EQ(rows.size(), 16u);
  std::vector<size_t> expect{0, 1};
  for (int i = 0; i < 7; ++i) expect.push_back(0);
  for (int i = 0; i < 7; ++i) expect.push_back(1);
  EXPECT_EQ(rows, expect);
  EXPECT_THROW(extend(X, B), std::invalid_argument);
  InputTensor E = extend(g_cat(X), B);
  EXPECT_EQ(E.dims, (std::vector<size_t>{16, 1}));
  for (size_t i = 0; i < 16; ++i) EXPECT_EQ(E[i], Fe{expect[i] + 1});
}

TEST(Extend, GcatAppendsZeroRow) {
  PrimeField f(5);
  InputTensor X(f, {2, 2}, {Fe{1}, Fe{2}, Fe{3}, Fe{4}});
  InputTensor G = g_cat(X);
  EXPECT_EQ(G.dims, (std::vector<size_t>{3, 2}));
  EXPECT_EQ(G.row(2).data, (std::vector<Fe>{Fe{0}, Fe{0}}));
}

TEST(UniformOracle, HalfHalfMap) {
  auto Q = make_uniform_oracle(Pmf::uniform({2}));
  std::vector<size_t> expect{1, 2};
  for (int i = 0; i < 7; ++i) expect.push_back(1);
  for (int i = 0; i < 7; ++i) expect.push_back(2);
  EXPECT_EQ(Q.n, 2u);
  EXPECT_EQ(Q.Q, expect);
}

TEST(Metric, DistancesAndHybrid) {
  PrimeField f(3);
  InputTensor X(f, {4}, {Fe{0}, Fe{1}, Fe{2}, Fe{0}});
  InputTensor Y(f, {4}, {Fe{0}, Fe{2}, Fe{2}, Fe{1}});
  Pmf D({4}, {q(1, 2), q(1, 8), q(1, 8), q(1, 4)});
  EXPECT_EQ(dist(X, Y, D), q(3, 8));
  EXPECT_EQ(dist(X, Y, Pmf::uniform({4})), q(1, 2));
  EXPECT_EQ(hybrid_dist(X, Y, D, Pmf::uniform({4})), q(1, 2));
  EXPECT_EQ(Metric::hybrid(D, Pmf::uniform({4})).distance(X, Y), q(1, 2));
  EXPECT_TRUE(ball_membership(X, Y, D, q(1, 2)));
  EXPECT_FALSE(ball_membership(X, Y, D, q(3, 8)));
}

TEST(Enumeration, ClosestMemberMatchesDirectScan) {
  // k=2, m=1 over F3: members with P(2) = 1 are {(a,b) : 2b - a = 1}
  PrimeField f(3);
  PvalInstance inst{f, 2, 1, {{Fe{2}}}, {Fe{1}}};
  auto members = enumerate_pval(inst);
  ASSERT_EQ(members.size(), 3u);
  for (const auto& Y : members) EXPECT_TRUE(pval_member(Y, inst));
  InputTensor X(f, {2}, {Fe{0}, Fe{0}});
  Pmf D({2}, {q(3, 4), q(1, 4)});
  auto c = closest_pval_member(X, inst, Metric::of(D));
  // (0,2): differs on the light cell only
  EXPECT_EQ(c.distance, Distance::of(q(1, 4)));
  ASSERT_TRUE(c.witness);
  EXPECT_EQ(c.witness->data, (std::vector<Fe>{Fe{0}, Fe{2}}));
}

TEST(Enumeration, EmptyLanguageIsInfinite) {
  PrimeField f(3);
  // P(0) = X_0 pinned to two values
  PvalInstance inst{f, 2, 1, {{Fe{0}}, {Fe{0}}}, {Fe{1}, Fe{2}}};
  InputTensor X(f, {2});
  EXPECT_TRUE(dist_to_pval_bruteforce(X, inst, Metric::uniform({2})).infinite);
  EXPECT_TRUE(pval_min_distance(inst).infinite);
}

TEST(Enumeration, MinDistanceIsKernelWeight) {
  PrimeField f(5);
  // one constraint on [2]^1 leaves a line; members differ in both cells
  PvalInstance inst{f, 2, 1, {{Fe{3}}}, {Fe{2}}};
  EXPECT_EQ(pval_min_distance(inst), Distance::of(Rational(1)));
  PvalInstance free{f, 2, 1, {}, {}};
  EXPECT_EQ(pval_min_distance(free), Distance::of(q(1, 2)));
}

TEST(Enumeration, BudgetRefusal) {
  PrimeField f(17);
  PvalInstance inst{f, 2, 4, {}, {}};
  InputTensor X = InputTensor::cube(f, 2, 4);
  EnumerationOptions opt{1000, Exec::Serial};
  EXPECT_THROW(dist_to_pval_bruteforce(X, inst, Metric::uniform({2, 2, 2, 2}), opt), BudgetExceeded);
}

TEST(Enumeration, SerialAndParallelAgree) {
  PrimeField f(5);
  PvalInstance inst{f, 2, 2, {{Fe{3}, Fe{4}}}, {Fe{1}}};
  InputTensor X(f, {2, 2}, {Fe{1}, Fe{2}, Fe{3}, Fe{4}});
  Pmf D({2, 2}, {q(1, 2), q(1, 4), q(1, 8), q(1, 8)});
  auto a = closest_pval_member(X, inst, Metric::of(D), {kDefaultEnumerationBudget, Exec::Serial});
  auto b = closest_pval_member(X, inst, Metric::of(D), {kDefaultEnumerationBudget, Exec::Parallel});
  EXPECT_EQ(a.distance, b.distance);
  EXPECT_EQ(a.witness->data, b.witness->data);
}

TEST(Sampler, FrequenciesTrackMasses) {
  Pmf D({3}, {q(1, 2), q(1, 3), q(1, 6)});
  Sampler s(D);
  Rng rng(4);
  std::vector<int> hits(3);
  const int N = 60000;
  for (int i = 0; i < N; ++i) ++hits[s.draw(rng)];
  EXPECT_NEAR(hits[0] / double(N), 0.5, 0.015);
  EXPECT_NEAR(hits[1] / double(N), 1.0 / 3, 0.015);
  EXPECT_NEAR(hits[2] / double(N), 1.0 / 6, 0.015);
}

TEST(Product, JointAndTail) {
  ProductDistribution D{{Pmf({2}, {q(1, 4), q(3, 4)}), Pmf::uniform({2})}};
  EXPECT_EQ(D.joint(), Pmf({2, 2}, {q(1, 8), q(1, 8), q(3, 8), q(3, 8)}));
  EXPECT_EQ(D.tail(1), Pmf::uniform({2}));
}
