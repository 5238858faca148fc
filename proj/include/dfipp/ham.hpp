#pragma once

#include <cstdint>
#include <functional>
#include <utility>

#include "dfipp/distribution.hpp"
#include "dfipp/rational.hpp"
#include "dfipp/session.hpp"

namespace dfipp {

struct HamParams {
  size_t n = 0;
  uint64_t w = 0;
  Rational eps = Rational(1, 4);
  uint64_t c = 2;  // iterations = ceil(c / eps)
};

uint64_t ham_iterations(const Rational& eps, uint64_t c);

// Verifier for the Hamming-slice IPP. Uses samples only, never queries.
Verdict ham_verifier(Session& s, const HamParams& p);

// (h0, h1) answered for the 1-based interval [L, U] with claimed count v.
using HamSplit = std::function<std::pair<uint64_t, uint64_t>(size_t L, size_t U, uint64_t v)>;

// Splits by counting ones of a committed string. With the real input this is
// the honest prover; with another string it is the fixed-alternative prover.
HamSplit ham_counting_split(const InputTensor& committed);
// Uniformly random split among those that pass the sum and range checks.
HamSplit ham_random_split(uint64_t seed);
// Breaks the sum check at every node.
HamSplit ham_bad_sum_split();

class HamProver : public ProverStrategy {
 public:
  HamProver(size_t n, uint64_t w, HamSplit split);
  Payload respond(const Transcript& t) override;

 private:
  size_t n_;
  uint64_t w_;
  HamSplit split_;
  size_t L_ = 1, U_ = 0;
  uint64_t v_ = 0;
  uint64_t h_[2] = {0, 0};
  bool awaiting_bit_ = false;
};

SessionResult run_ham(const InputTensor& X, const Pmf& D, const HamParams& p, ProverStrategy& prover,
                      uint64_t seed);

using SymmetricPredicate = std::function<bool(uint64_t weight)>;

Verdict symmetric_verifier(Session& s, size_t n, const SymmetricPredicate& S, const Rational& eps, uint64_t c = 2);

// Sends w' first, then answers the Hamming protocol for w'.
class SymmetricProver : public ProverStrategy {
 public:
  SymmetricProver(size_t n, uint64_t claimed_weight, HamSplit split);
  Payload respond(const Transcript& t) override;

 private:
  size_t n_;
  uint64_t w_;
  bool sent_weight_ = false;
  HamProver inner_;
};

uint64_t hamming_weight(const InputTensor& X);
// Exact d_D(X, {Y : Hwt(Y) = w}) for a 0/1 tensor: flip the cheapest cells.
Distance distance_to_hamming_slice(const InputTensor& X, const Pmf& D, uint64_t w);

struct HamLbFixture {
  size_t n = 0;
  Rational eps;
  double exponent_outer = 0;
  double exponent_inner = 0;
  size_t size1 = 0, size2 = 0, size3 = 0;
  Pmf D1, D2;
  InputTensor X, Y;
  uint64_t w = 0;
  Rational x_ones_mass;  // P_{D1}[X = 1]
  Rational y_ones_mass;  // P_{D2}[Y = 1]
  Distance far;          // d_{D1}(X, HAM(w))
};

constexpr double kHamLbOuterExponent = 2.0 / 3.0;
constexpr double kHamLbInnerExponent = 2.0 / 3.0 - 0.001;

// Middle and last interval sizes are floor(n^e) rounded down to a multiple
// of 6 so the 1/3 and 1/2 weight patterns are exact.
HamLbFixture gen_ham_lb_fixture(size_t n, const Rational& eps, double exponent_outer = kHamLbOuterExponent,
                                double exponent_inner = kHamLbInnerExponent);

}  // namespace dfipp
