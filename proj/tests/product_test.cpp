#include <gtest/gtest.h>

#include "dfipp/lemmas.hpp"
#include "dfipp/nc.hpp"
#include "dfipp/product.hpp"
#include "dfipp/rlcc.hpp"

using namespace dfipp;

namespace {

// output 1 iff input bits 0 and 1 are both set: counts (3/4, 1/4) of 2^10
SamplingCircuit and_circuit_10() { return SamplingCircuit(10, {Gate{GateOp::And, 0, 1}}, {10}); }

InputTensor random_cube(const PrimeField& f, size_t k, size_t m, Rng& rng) {
  InputTensor X = InputTensor::cube(f, k, m);
  for (auto& x : X.data) x = f.of(rng.below(f.modulus()));
  return X;
}

class FirstMessageOverride : public ProverStrategy {
 public:
  FirstMessageOverride(ProverStrategy& inner, Payload first) : inner_(inner), first_(std::move(first)) {}
  Payload respond(const Transcript& t) override {
    Payload p = inner_.respond(t);
    return t.messages.empty() ? first_ : p;
  }

 private:
  ProverStrategy& inner_;
  Payload first_;
};

}  // namespace

TEST(SetLowerBound, BucketBits) {
  MarginalClaim c{{Rational(3, 4), Rational(1, 4)}, Rational(1, 1000), Rational(1, 20)};
  EXPECT_EQ(set_lb_bucket_bits(c, 10), (std::vector<unsigned>{0, 0}));
  EXPECT_EQ(set_lb_bucket_bits(c, 10, 3u), (std::vector<unsigned>{3, 3}));
  // with loose parameters the honest bucket keeps at least the target count
  MarginalClaim loose{{Rational(1, 2), Rational(1, 2)}, Rational(1, 2), Rational(1, 2)};
  // target 8k/(delta tau^2) = 128, p 2^16 = 32768 -> b = 8
  EXPECT_EQ(set_lb_bucket_bits(loose, 16), (std::vector<unsigned>{8, 8}));
  MarginalClaim zero{{Rational(1), Rational(0)}, Rational(1, 2), Rational(1, 2)};
  EXPECT_EQ(set_lb_bucket_bits(zero, 16, 4u), (std::vector<unsigned>{4, 0}));
}

TEST(SetLowerBound, ExactListingAcceptsHonest) {
  auto C = and_circuit_10();
  EXPECT_EQ(circuit_counts(C, 2), (std::vector<uint64_t>{768, 256}));
  MarginalClaim c{{Rational(3, 4), Rational(1, 4)}};
  for (uint64_t seed = 0; seed < 5; ++seed) {
    SetLowerBoundProver p(C, c);
    auto res = run_set_lower_bound(C, c, p, seed);
    EXPECT_TRUE(res.verdict.accepted);
    // no hash bits, then count + 2^10 preimages of 10 bits
    EXPECT_EQ(res.ledger.comm_bits, 2u * 11 + 1024u * 10);
  }
}

TEST(SetLowerBound, HashedBucketsWithOverride) {
  auto C = and_circuit_10();
  MarginalClaim honest{{Rational(3, 4), Rational(1, 4)}, Rational(1, 2), Rational(1, 20)};
  MarginalClaim inflated{{Rational(1, 2), Rational(1, 2)}, Rational(1, 2), Rational(1, 20)};
  const int N = 300;
  int acc_honest = 0, acc_inflated = 0;
  for (int seed = 0; seed < N; ++seed) {
    SetLowerBoundProver p1(C, honest, 3u), p2(C, inflated, 3u);
    acc_honest += run_set_lower_bound(C, honest, p1, seed, 3u).verdict.accepted;
    auto r2 = run_set_lower_bound(C, inflated, p2, seed, 3u);
    acc_inflated += r2.verdict.accepted;
    if (!r2.verdict.accepted) EXPECT_EQ(r2.verdict.reject_reason, "lower-bound");
  }
  // bucket of symbol 1 has mean 32 against a threshold of 24 (honest) or 48 (inflated)
  EXPECT_GE(acc_honest, N * 8 / 10);
  EXPECT_LE(acc_inflated, N / 20);
}

TEST(SetLowerBound, ForgedWitnessRejected) {
  auto C = and_circuit_10();
  MarginalClaim c{{Rational(3, 4), Rational(1, 4)}};
  // a symbol-1 list containing an input that maps to 0
  class Forger : public ProverStrategy {
   public:
    Payload respond(const Transcript&) override {
      PayloadWriter w;
      w.put(768, 11);
      for (uint64_t x = 0; x < 1024; ++x) {
        if ((x & 3) != 3) w.put(x, 10);
      }
      w.put(1, 11);
      w.put(0, 10);
      return w.finish();
    }
  } forger;
  EXPECT_EQ(run_set_lower_bound(C, c, forger, 0).verdict.reject_reason, "witness");
}

TEST(Whitebox, Kappa) {
  EXPECT_EQ(whitebox_kappa(2, 1), 128u);
  EXPECT_EQ(whitebox_kappa(4, 4), 320u);
}

TEST(Whitebox, FactorCircuits) {
  auto fx = gen_product_fixture(4, 3, ProductProfile::DyadicRandom, 7);
  Pmf joint = circuit_pmf(fx.C, {4, 4, 4});
  EXPECT_EQ(joint, fx.D.joint());
  for (size_t f = 0; f < 3; ++f) EXPECT_EQ(circuit_pmf(factor_circuit(fx.C, 4, f), {4}), fx.D.factors[f]);
  EXPECT_EQ(circuit_pmf(tail_circuit(fx.C, 4, 1, 3), {4, 4}), fx.D.tail(1));
}

TEST(Whitebox, HonestCompleteness) {
  PrimeField f(17);
  for (size_t m : {2, 3}) {
    for (size_t r = 1; r <= 2; ++r) {
      for (uint64_t seed = 0; seed < 4; ++seed) {
        Rng rng(seed);
        auto fx = gen_product_fixture(2, m, ProductProfile::DyadicRandom, seed);
        InputTensor X = random_cube(f, 2, m, rng);
        auto inst = generate_pval_claims(ClaimGenerator{ClaimMode::Honest, 3, {}}, X, Rational(1, 4), rng);
        WhiteboxParams p{inst, Rational(1, 4), r, 2, Rational(1, 1000), std::nullopt, std::nullopt};
        WhiteboxProver prover(X, fx.C, p);
        WhiteboxTrace tr;
        auto res = run_whitebox(X, fx.C, p, prover, seed, &tr);
        ASSERT_TRUE(res.verdict.accepted) << res.verdict.reject_reason;
        EXPECT_EQ(res.ledger.messages, 4 * r + 1);
        EXPECT_EQ(tr.claims.size(), r);
        EXPECT_EQ(tr.granularities[0].total(), 16u);
        EXPECT_EQ(res.ledger.queries - tr.fold.queries_before_leaf_phase, tr.fold.expected_leaf_queries());
      }
    }
  }
}

TEST(Whitebox, OverfullClaimRejected) {
  PrimeField f(17);
  Rng rng(1);
  auto fx = gen_product_fixture(2, 2, ProductProfile::Uniform, 1);
  InputTensor X = random_cube(f, 2, 2, rng);
  auto inst = generate_pval_claims(ClaimGenerator{ClaimMode::Honest, 2, {}}, X, Rational(1, 4), rng);
  WhiteboxParams p{inst, Rational(1, 4), 1, 2, Rational(1, 1000), std::nullopt, std::nullopt};
  WhiteboxProver honest(X, fx.C, p);
  const size_t L = fx.C.input_bits();
  PayloadWriter w;
  w.put(uint64_t{1} << L, static_cast<unsigned>(L + 1));
  w.put(1, static_cast<unsigned>(L + 1));
  FirstMessageOverride bad(honest, w.finish());
  EXPECT_EQ(run_whitebox(X, fx.C, p, bad, 0).verdict.reject_reason, "claim");
}

TEST(Fixture, DispersionByProfile) {
  for (size_t k : {2, 4}) {
    auto u = gen_product_fixture(k, 2, ProductProfile::Uniform, 1);
    EXPECT_EQ(dispersion_rho(u.D.joint()).rho, Rational(1));
    auto rc = gen_product_fixture(k, 2, ProductProfile::RowConcentrated, 1);
    EXPECT_EQ(dispersion_rho(rc.D.joint()).rho, Rational(static_cast<long>(k)));
    EXPECT_EQ(circuit_pmf(rc.C, {k, k}), rc.D.joint());
    auto dy = gen_product_fixture(k, 2, ProductProfile::DyadicRandom, 5);
    EXPECT_EQ(circuit_pmf(dy.C, {k, k}), dy.D.joint());
    EXPECT_EQ(dy.factor_input_bits, (std::vector<size_t>{std::bit_width(k) + 1, std::bit_width(k) + 1}));
  }
  EXPECT_THROW(gen_product_fixture(3, 2, ProductProfile::Uniform, 1), std::invalid_argument);
  EXPECT_EQ(parse_profile("row-concentrated"), ProductProfile::RowConcentrated);
  EXPECT_THROW(parse_profile("bogus"), std::invalid_argument);
}

TEST(ProductDpl, RandomInstancesHold) {
  PrimeField f(5);
  Rng rng(17);
  const Rational tau(1, 1000);
  int nonvacuous = 0;
  for (int t = 0; t < 80; ++t) {
    auto pi = random_preservation_instance(rng, f, 2, 2, true);
    ProductDistribution D{{random_pmf(rng, {2}, false), random_pmf(rng, {2}, false)}};
    std::vector<Rational> claims{D.factors[0][0] * (1 - tau), D.factors[0][1]};
    auto rep = check_product_dpl(pi.X, D, pi.Yp, pi.inst, claims, tau);
    EXPECT_TRUE(rep.claims_in_range);
    EXPECT_TRUE(rep.granular_bound);
    if (rep.vacuous) continue;
    ++nonvacuous;
    EXPECT_TRUE(rep.holds) << to_string(rep.lhs) << " < " << to_string(rep.rhs);
    EXPECT_EQ(rep.rows.size(), 3u);
  }
  EXPECT_GT(nonvacuous, 20);
}

TEST(Learnable, HadamardLanguage) {
  const size_t l = 3, n = 8;
  ExplicitLanguage L{PrimeField(2), n, {}};
  for (uint64_t a = 0; a < n; ++a) L.members.push_back(hadamard_codeword(a, l));
  InputTensor X = hadamard_codeword(5, l);
  std::vector<uint64_t> w{1, 2, 3, 4, 5, 6, 7, 8};
  Pmf D = Pmf::from_weights({n}, w);
  auto ipp = witness_uniform_ipp(L);
  auto run = [&](const Learner& learner, const InputTensor& Y, const InputTensor& input, uint64_t seed) {
    MemberProver p(Y);
    return run_session([&](Session& s) { return learnable_verifier(s, learner, ipp, Rational(1, 2)); }, p,
                       OracleHandles{&input, &D, nullptr}, seed);
  };
  for (uint64_t seed = 0; seed < 50; ++seed) {
    auto res = run(exact_learner(D), X, X, seed);
    ASSERT_TRUE(res.verdict.accepted);
    EXPECT_EQ(res.ledger.comm_bits, n);
    EXPECT_LE(res.ledger.queries, 16u);
  }
  EXPECT_EQ(run(aborting_learner(), X, X, 0).verdict.reject_reason, "learner");
  InputTensor junk = X;
  junk.data[0].v ^= 1;
  EXPECT_EQ(run(exact_learner(D), junk, X, 0).verdict.reject_reason, "language");
  EXPECT_EQ(&closest_member(L, X, D), &L.members[5]);
  EXPECT_EQ(virtual_uniform_distance(L, X, make_uniform_oracle(D)), Rational(0));
}

TEST(Learnable, FarInputRejected) {
  const size_t l = 3, n = 8;
  ExplicitLanguage L{PrimeField(2), n, {}};
  for (uint64_t a = 0; a < n; ++a) L.members.push_back(hadamard_codeword(a, l));
  InputTensor X(PrimeField(2), {n});
  for (size_t i = 0; i < n; i += 2) X.data[i] = Fe{1};
  Pmf D = Pmf::uniform({n});
  const InputTensor& Y = closest_member(L, X, D);
  auto Q = make_uniform_oracle(D);
  ASSERT_GE(virtual_uniform_distance(L, X, Q), Rational(1, 4));
  auto ipp = witness_uniform_ipp(L);
  int rejects = 0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    MemberProver p(Y);
    rejects += !run_session([&](Session& s) { return learnable_verifier(s, exact_learner(D), ipp, Rational(1, 2)); },
                            p, OracleHandles{&X, &D, nullptr}, seed)
                    .verdict.accepted;
  }
  EXPECT_GE(rejects, 90);
}
