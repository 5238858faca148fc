#include <gtest/gtest.h>

#include <cmath>

#include "dfipp/experiments.hpp"
#include "dfipp/ham.hpp"

using namespace dfipp;

namespace {

InputTensor bits(std::initializer_list<int> v) {
  std::vector<Fe> d;
  for (int x : v) d.push_back(Fe{static_cast<uint64_t>(x)});
  return InputTensor(PrimeField(2), {d.size()}, d);
}

}  // namespace

TEST(Ham, Iterations) {
  EXPECT_EQ(ham_iterations(Rational(1, 4), 2), 8u);
  EXPECT_EQ(ham_iterations(Rational(1, 3), 2), 6u);
  EXPECT_EQ(ham_iterations(Rational(2, 5), 2), 5u);
}

TEST(Ham, SliceDistanceFlipsCheapestCells) {
  InputTensor X = bits({1, 1, 0, 0, 1});
  Pmf D({5}, {Rational(1, 2), Rational(1, 8), Rational(1, 8), Rational(1, 8), Rational(1, 8)});
  EXPECT_EQ(distance_to_hamming_slice(X, D, 3), Distance::of(0));
  EXPECT_EQ(distance_to_hamming_slice(X, D, 1), Distance::of(Rational(1, 4)));
  EXPECT_EQ(distance_to_hamming_slice(X, D, 5), Distance::of(Rational(1, 4)));
  EXPECT_TRUE(distance_to_hamming_slice(X, D, 6).infinite);
  InputTensor Y = closest_weight_string(X, D, 1);
  EXPECT_EQ(hamming_weight(Y), 1u);
  EXPECT_EQ(dist(X, Y, D), Rational(1, 4));
}

TEST(Ham, HonestProverAlwaysAccepted) {
  InputTensor X = bits({1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 0});
  Pmf D = Pmf::uniform({11});
  HamParams p{11, 6, Rational(1, 4), 2};
  for (uint64_t seed = 0; seed < 200; ++seed) {
    HamProver prover(11, 6, ham_counting_split(X));
    auto res = run_ham(X, D, p, prover, seed);
    ASSERT_TRUE(res.verdict.accepted) << seed;
    EXPECT_EQ(res.ledger.queries, 0u);
    EXPECT_EQ(res.ledger.samples, 8u);
  }
}

TEST(Ham, CommunicationMatchesTreeDepth) {
  // n = 16: four levels, each with two width-5 counts and one bit back
  InputTensor X(PrimeField(2), {16});
  for (size_t i = 0; i < 8; ++i) X.data[i] = Fe{1};
  HamParams p{16, 8, Rational(1, 2), 2};
  HamProver prover(16, 8, ham_counting_split(X));
  auto res = run_ham(X, Pmf::uniform({16}), p, prover, 3);
  ASSERT_TRUE(res.verdict.accepted);
  EXPECT_EQ(res.ledger.messages, 4u * 2 * 4);
  EXPECT_EQ(res.ledger.comm_bits, 4u * 4 * (2 * 5 + 1));
}

TEST(Ham, BadSumRejectedAtRoot) {
  InputTensor X = bits({1, 0, 1, 0});
  HamParams p{4, 2, Rational(1, 2), 2};
  HamProver prover(4, 2, ham_bad_sum_split());
  auto res = run_ham(X, Pmf::uniform({4}), p, prover, 1);
  EXPECT_FALSE(res.verdict.accepted);
  EXPECT_EQ(res.verdict.reject_reason, "sum");
  EXPECT_EQ(res.ledger.messages, 1u);
}

TEST(Ham, FixedAlternativeSoundness) {
  // X is 1/2-far from weight 0 under D: committing to the all-zero string
  // gets caught whenever a sample lands on a one
  InputTensor X = bits({1, 1, 0, 0, 0, 0, 0, 0});
  Pmf D({8}, {Rational(1, 4), Rational(1, 4), Rational(1, 12), Rational(1, 12), Rational(1, 12), Rational(1, 12),
              Rational(1, 12), Rational(1, 12)});
  ASSERT_EQ(distance_to_hamming_slice(X, D, 0), Distance::of(Rational(1, 2)));
  HamParams p{8, 0, Rational(1, 2), 2};
  int rejects = 0;
  const int N = 400;
  for (int seed = 0; seed < N; ++seed) {
    HamProver prover(8, 0, ham_counting_split(closest_weight_string(X, D, 0)));
    rejects += !run_ham(X, D, p, prover, seed).verdict.accepted;
  }
  // 4 samples each miss with probability 1/2
  double expect = 1 - std::pow(0.5, 4);
  EXPECT_GE(rejects / double(N), expect - 3 * std::sqrt(expect * (1 - expect) / N));
}

TEST(Ham, RandomSplitMostlyRejectedWhenFar) {
  InputTensor X = bits({1, 1, 1, 1, 1, 1, 1, 1});
  HamParams p{8, 0, Rational(1, 4), 2};
  int rejects = 0;
  for (int seed = 0; seed < 100; ++seed) {
    HamProver prover(8, 0, ham_random_split(seed));
    rejects += !run_ham(X, Pmf::uniform({8}), p, prover, seed).verdict.accepted;
  }
  EXPECT_EQ(rejects, 100);
}

TEST(Ham, WeightAboveLengthRejectedAsRange) {
  InputTensor X = bits({1, 0});
  HamParams p{2, 3, Rational(1, 2), 2};
  HamProver prover(2, 3, ham_random_split(0));
  EXPECT_EQ(run_ham(X, Pmf::uniform({2}), p, prover, 0).verdict.reject_reason, "range");
}

TEST(Symmetric, EvenWeightCompletenessAndCost) {
  InputTensor X = bits({1, 1, 0, 1, 1, 0, 0, 0});
  Pmf D = Pmf::uniform({8});
  auto even = [](uint64_t w) { return w % 2 == 0; };
  SymmetricProver prover(8, 4, ham_counting_split(X));
  auto res = run_session([&](Session& s) { return symmetric_verifier(s, 8, even, Rational(1, 4)); }, prover,
                         OracleHandles{&X, &D, nullptr}, 5);
  EXPECT_TRUE(res.verdict.accepted);
  // one extra message for the weight, plus the Hamming exchange
  EXPECT_EQ(res.ledger.messages, 1u + 8 * 2 * 3);
}

TEST(Symmetric, ClaimOutsidePredicateRejected) {
  InputTensor X = bits({1, 0, 0, 0});
  Pmf D = Pmf::uniform({4});
  auto even = [](uint64_t w) { return w % 2 == 0; };
  SymmetricProver prover(4, 1, ham_counting_split(X));
  auto res = run_session([&](Session& s) { return symmetric_verifier(s, 4, even, Rational(1, 4)); }, prover,
                         OracleHandles{&X, &D, nullptr}, 5);
  EXPECT_FALSE(res.verdict.accepted);
  EXPECT_EQ(res.verdict.reject_reason, "predicate");
}

TEST(HamLb, LeafStringStructure) {
  auto fx = gen_ham_lb_fixture(4096, Rational(1, 100));
  EXPECT_EQ(fx.size1 + fx.size2 + fx.size3, 4096u);
  EXPECT_EQ(fx.size2 % 6, 0u);
  EXPECT_EQ(fx.size3 % 6, 0u);
  // X: all of I1, a third of I2, half of I3; Y: all of I1, half of I2, a third of I3
  uint64_t x_tail = 0, y_tail = 0;
  for (size_t i = 0; i < fx.size1; ++i) {
    ASSERT_EQ(fx.X[i], Fe{1});
    ASSERT_EQ(fx.Y[i], Fe{1});
  }
  for (size_t i = fx.size1; i < 4096; ++i) {
    x_tail += fx.X[i].v;
    y_tail += fx.Y[i].v;
  }
  EXPECT_EQ(x_tail, fx.size2 / 3 + fx.size3 / 2);
  EXPECT_EQ(y_tail, fx.size2 / 2 + fx.size3 / 3);
  EXPECT_EQ(fx.w, hamming_weight(fx.Y));
  // ones carry the same mass under the two distributions
  EXPECT_EQ(fx.x_ones_mass, fx.y_ones_mass);
  EXPECT_EQ(fx.x_ones_mass, 1 - 20 * fx.eps + 8 * fx.eps);
}

TEST(HamLb, WeightsDifferByTheTailImbalance) {
  auto fx = gen_ham_lb_fixture(4096, Rational(1, 100));
  int64_t dx = static_cast<int64_t>(fx.size2 / 3 + fx.size3 / 2);
  int64_t dy = static_cast<int64_t>(fx.size2 / 2 + fx.size3 / 3);
  int64_t hx = static_cast<int64_t>(hamming_weight(fx.X)), w = static_cast<int64_t>(fx.w);
  EXPECT_EQ(hx - w, dx - dy);
  EXPECT_EQ(fx.far, distance_to_hamming_slice(fx.X, fx.D1, fx.w));
}
