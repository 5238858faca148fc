#include <gtest/gtest.h>

#include "dfipp/nc.hpp"

using namespace dfipp;

namespace {

InputTensor random_cube(const PrimeField& f, size_t k, size_t m, Rng& rng) {
  InputTensor X = InputTensor::cube(f, k, m);
  for (auto& x : X.data) x = f.of(rng.below(f.modulus()));
  return X;
}

}  // namespace

TEST(Claims, HonestCount) {
  EXPECT_EQ(honest_claim_count(16, Rational(1, 4)), 64u);
  EXPECT_EQ(honest_claim_count(4, Rational(1, 8)), 4u);
  EXPECT_EQ(honest_claim_count(1, Rational(1, 4)), 1u);
}

TEST(Claims, HonestClaimsHoldForInput) {
  PrimeField f(17);
  Rng rng(1);
  InputTensor X = random_cube(f, 2, 3, rng);
  auto inst = generate_pval_claims(ClaimGenerator{}, X, Rational(1, 4), rng);
  EXPECT_EQ(inst.J.size(), honest_claim_count(8, Rational(1, 4)));
  EXPECT_TRUE(pval_member(X, inst));
}

TEST(Claims, AdversarialStrategyIsUsed) {
  PrimeField f(5);
  PvalInstance fixed{f, 2, 1, {{Fe{2}}}, {Fe{3}}};
  ClaimGenerator g{ClaimMode::Adversarial, std::nullopt, fixed_claims(fixed)};
  Rng rng(0);
  InputTensor X(f, {2});
  auto inst = generate_pval_claims(g, X, Rational(1, 4), rng);
  EXPECT_EQ(inst.v, fixed.v);
  EXPECT_THROW(generate_pval_claims(ClaimGenerator{ClaimMode::Adversarial, std::nullopt, {}}, X, Rational(1, 4), rng),
               std::invalid_argument);
}

TEST(Claims, ExtendAppendsCellPoints) {
  PrimeField f(7);
  PvalInstance base{f, 3, 2, {{Fe{5}, Fe{6}}}, {Fe{1}}};
  auto ext = extend_claims(base, {7}, {Fe{4}});
  ASSERT_EQ(ext.J.size(), 2u);
  // cell 7 of [3]^2 is (2,1)
  EXPECT_EQ(ext.J[1], (EvalPoint{Fe{2}, Fe{1}}));
  EXPECT_EQ(ext.v[1], Fe{4});
}

TEST(DfNc, SampleCount) {
  EXPECT_EQ(df_nc_sample_count(Rational(1, 4)), 12u);
  EXPECT_EQ(df_nc_sample_count(Rational(2, 7)), 11u);
}

TEST(DfNc, HonestCompletenessUnderArbitraryDistribution) {
  PrimeField f(17);
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    InputTensor X = random_cube(f, 2, 3, rng);
    auto inst = generate_pval_claims(ClaimGenerator{ClaimMode::Honest, 4, {}}, X, Rational(1, 4), rng);
    std::vector<uint64_t> w(8);
    for (auto& x : w) x = rng.below(4);
    w[seed % 8] += 1;
    Pmf D = Pmf::from_weights({2, 2, 2}, w);
    DfNcParams p{inst, Rational(1, 4), 1, std::nullopt};
    DfNcProver prover(X, p, Commit::Input);
    auto res = run_df_ipp_nc(X, D, p, prover, seed);
    ASSERT_TRUE(res.verdict.accepted) << res.verdict.reject_reason;
    EXPECT_EQ(res.ledger.samples, 12u);
    // (I,z), then one fold phase and the leaves
    EXPECT_EQ(res.ledger.messages, 4u);
  }
}

TEST(DfNc, ClosestAlternativeCaughtBySamples) {
  // D is a point mass on a cell where X disagrees with every member, so the
  // sampled constraints leave no member to commit to
  PrimeField f(5);
  int rejects = 0, trials = 0;
  for (uint64_t seed = 0; seed < 300 && trials < 40; ++seed) {
    Rng rng(seed);
    InputTensor X = random_cube(f, 2, 2, rng);
    InputTensor W = random_cube(f, 2, 2, rng);
    auto inst = generate_pval_claims(ClaimGenerator{ClaimMode::Honest, 3, {}}, W, Rational(1, 4), rng);
    auto members = enumerate_pval(inst);
    if (members.empty()) continue;
    // a cell where every member differs from X
    std::optional<size_t> cell;
    for (size_t c = 0; c < 4 && !cell; ++c) {
      bool all = true;
      for (const auto& Y : members) all = all && Y[c] != X[c];
      if (all) cell = c;
    }
    if (!cell) continue;
    ++trials;
    Pmf D = Pmf::point({2, 2}, *cell);
    DfNcParams p{inst, Rational(1, 4), 1, std::nullopt};
    DfNcProver prover(X, p, Commit::ClosestUniform);
    rejects += !run_df_ipp_nc(X, D, p, prover, seed).verdict.accepted;
  }
  ASSERT_GE(trials, 10);
  EXPECT_EQ(rejects, trials);
}

TEST(Dispersed, DefaultRounds) {
  EXPECT_EQ(default_dispersed_rounds(2, 4, Rational(1, 4)), 2u);
  EXPECT_EQ(default_dispersed_rounds(2, 4, Rational(1, 100)), 4u);
  EXPECT_EQ(default_dispersed_rounds(4, 3, Rational(1, 2)), 1u);
  EXPECT_EQ(default_dispersed_rounds(3, 3, Rational(1, 9)), 2u);
}

TEST(Dispersed, HonestCompleteness) {
  PrimeField f(17);
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    InputTensor X = random_cube(f, 2, 4, rng);
    auto inst = generate_pval_claims(ClaimGenerator{ClaimMode::Honest, 5, {}}, X, Rational(1, 4), rng);
    std::vector<uint64_t> w(16);
    for (auto& x : w) x = 1 + rng.below(3);
    Pmf D = Pmf::from_weights({2, 2, 2, 2}, w);
    DispersedParams p{inst, Rational(1, 4), dispersion_rho(D).rho, 2, std::nullopt};
    FoldProver prover(X, inst, 2, default_kappa(2, 2));
    FinIppTrace tr;
    auto res = run_dispersed_ipp_nc(X, D, p, prover, seed, &tr);
    ASSERT_TRUE(res.verdict.accepted) << res.verdict.reject_reason;
    uint64_t checks = 0;
    for (const auto& l : tr.leaves) checks += l.checks;
    EXPECT_EQ(res.ledger.samples, checks);
  }
}

TEST(Dispersed, CommittedMember) {
  PrimeField f(3);
  PvalInstance inst{f, 2, 1, {{Fe{2}}}, {Fe{1}}};
  InputTensor X(f, {2}, {Fe{0}, Fe{0}});
  Pmf D({2}, {Rational(3, 4), Rational(1, 4)});
  EXPECT_EQ(committed_member(X, inst, &D, Commit::Input)->data, X.data);
  EXPECT_EQ(committed_member(X, inst, &D, Commit::ClosestHybrid)->data, (std::vector<Fe>{Fe{0}, Fe{2}}));
  EXPECT_THROW(committed_member(X, inst, nullptr, Commit::ClosestHybrid), std::invalid_argument);
  PvalInstance empty{f, 2, 1, {{Fe{0}}, {Fe{0}}}, {Fe{1}, Fe{2}}};
  EXPECT_FALSE(committed_member(X, empty, &D, Commit::ClosestUniform));
}
