#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dfipp/folding.hpp"
#include "dfipp/language.hpp"

namespace dfipp {

// ---- set lower bound ------------------------------------------------------

// Claimed symbol probabilities against 2^L uniform circuit inputs.
struct MarginalClaim {
  std::vector<Rational> p;
  Rational tau = Rational(1, 1000);
  Rational delta = Rational(1, 20);
};

// Per-symbol hash length: the largest b with p_i 2^L / 2^b >= 8k/(delta tau^2),
// else 0 (the prover then lists every preimage it counts). An override
// applies to every symbol with a positive claim.
std::vector<unsigned> set_lb_bucket_bits(const MarginalClaim& claim, size_t input_bits,
                                         std::optional<unsigned> override_bits = std::nullopt);

// Affine GF(2) hash x -> A x + c on L-bit inputs; row j of A is a mask.
struct AffineHash {
  std::vector<uint64_t> rows;
  uint64_t offset = 0;
  bool zero_at(uint64_t x) const;
};

std::vector<AffineHash> set_lb_send_hashes(Session& s, const std::vector<unsigned>& bits, size_t input_bits);
std::vector<AffineHash> set_lb_read_hashes(PayloadReader& r, const std::vector<unsigned>& bits, size_t input_bits);
// Prover side: count and sorted preimages x with C(x) = i and h_i(x) = 0.
void set_lb_write_witnesses(PayloadWriter& w, const SamplingCircuit& C, const std::vector<AffineHash>& hashes);
// Verifier side: re-evaluates every witness and compares the count with
// (1 - tau/2) p_i 2^L / 2^{b_i}.
Verdict set_lb_check_witnesses(PayloadReader& r, const SamplingCircuit& C, const MarginalClaim& claim,
                               const std::vector<unsigned>& bits, const std::vector<AffineHash>& hashes);

// Standalone protocol for an explicit claim: V sends hashes, P answers.
Verdict set_lower_bound_verifier(Session& s, const SamplingCircuit& C, const MarginalClaim& claim,
                                 std::optional<unsigned> override_bits = std::nullopt);

class SetLowerBoundProver : public ProverStrategy {
 public:
  SetLowerBoundProver(const SamplingCircuit& C, const MarginalClaim& claim,
                      std::optional<unsigned> override_bits = std::nullopt)
      : C_(C), claim_(claim), override_(override_bits) {}
  Payload respond(const Transcript& t) override;

 private:
  SamplingCircuit C_;
  MarginalClaim claim_;
  std::optional<unsigned> override_;
};

SessionResult run_set_lower_bound(const SamplingCircuit& C, const MarginalClaim& claim, ProverStrategy& prover,
                                  uint64_t seed, std::optional<unsigned> override_bits = std::nullopt);

// Exact output counts |C^{-1}(i)| for i < k.
std::vector<uint64_t> circuit_counts(const SamplingCircuit& C, size_t k);

// ---- white-box product IPP ------------------------------------------------

// max(1, ceil(32 log2(8k) log2(max(r,2))))
size_t whitebox_kappa(size_t k, size_t r);

struct WhiteboxParams {
  PvalInstance inst;
  Rational eps = Rational(1, 4);
  size_t r = 1;
  std::optional<size_t> kappa_override;
  Rational tau = Rational(1, 1000);
  std::optional<Rational> delta;  // defaults to 1/(20r)
  std::optional<unsigned> hash_bits_override;
};

struct WhiteboxTrace {
  FinIppTrace fold;
  std::vector<std::vector<Rational>> claims;
  std::vector<GranularitySet> granularities;
  std::vector<std::string> learner_verdicts;
};

// Per round: P claims the next factor's marginal, V sends hashes, P answers
// with preimage witnesses and Y', V sends folding vectors over the 8k-row
// extension. A final message carries the leaves: 4r+1 messages in total.
Verdict whitebox_verifier(Session& s, const WhiteboxParams& p, WhiteboxTrace* trace = nullptr);

class WhiteboxProver : public FoldProver {
 public:
  WhiteboxProver(const InputTensor& committed, const SamplingCircuit& C, const WhiteboxParams& p);
  Payload respond(const Transcript& t) override;

 private:
  SamplingCircuit C_;
  WhiteboxParams p_;
  size_t round_ = 0;
  int state_ = 0;  // 0 claim, 1 witnesses + rows, 2 absorb vectors
  MarginalClaim claim_;
  std::vector<int64_t> row_map_;
};

SessionResult run_whitebox(const InputTensor& X, const SamplingCircuit& C, const WhiteboxParams& p,
                           ProverStrategy& prover, uint64_t seed, WhiteboxTrace* trace = nullptr);

// Output bits of factor `factor` for a circuit whose outputs are the m
// factor symbols, most significant first.
SamplingCircuit factor_circuit(const SamplingCircuit& C, size_t k, size_t factor);
SamplingCircuit tail_circuit(const SamplingCircuit& C, size_t k, size_t first_factor, size_t m);

// ---- product distance preservation ----------------------------------------

struct ProductDplReport {
  bool premise = false;
  bool vacuous = false;
  bool claims_in_range = false;  // (1 - tau) D1(i) <= p_i <= D1(i)
  bool granular_bound = false;   // a_i / 8k >= p_i / 2
  Distance gamma;
  GranularitySet B;
  std::vector<Distance> rows;  // per source row, then the zero row
  Distance lhs;
  Distance rhs;
  bool holds = true;
};

// sum over the 8k extension rows of mu(X'_i, PVAL(J2, U_i)) >= 2k(1-tau) gamma
ProductDplReport check_product_dpl(const InputTensor& X, const ProductDistribution& D, const std::vector<Fe>& Yp,
                                   const PvalInstance& inst, const std::vector<Rational>& claims,
                                   const Rational& tau, const EnumerationOptions& opt = {});

// ---- learnable distributions ----------------------------------------------

// Interactive learner: returns a PMF or nullopt for the abort symbol.
using Learner = std::function<std::optional<Pmf>(Session&)>;
Learner exact_learner(const Pmf& D);
Learner aborting_learner();

// Explicit small language over F^n.
struct ExplicitLanguage {
  PrimeField field;
  size_t n = 0;
  std::vector<InputTensor> members;
  bool contains(const InputTensor& Y) const;
};

struct VirtualInput {
  UniformOracleMap map;
  // value of virtual slot s of g_cat(Y)_Q for an explicit Y
  Fe slot(const InputTensor& Y, size_t s) const;
};

// Uniform IPP over the virtual input; takes the virtual oracle and the
// proximity parameter.
using VirtualUniformIpp = std::function<Verdict(Session&, const VirtualInput&, const Rational& eps)>;

// Prover sends a member Y of L; the verifier spot-checks ceil(2/eps) uniform
// slots of the virtual input against g_cat(Y)_Q. Zero slots cost no query.
VirtualUniformIpp witness_uniform_ipp(const ExplicitLanguage& L);

// Learn at eps/2, build Q, run the uniform IPP at eps/4.
Verdict learnable_verifier(Session& s, const Learner& learner, const VirtualUniformIpp& ipp, const Rational& eps);

class MemberProver : public ProverStrategy {
 public:
  explicit MemberProver(const InputTensor& Y) : Y_(Y) {}
  Payload respond(const Transcript& t) override;

 private:
  InputTensor Y_;
};

// Closest member of L under D (smallest index on ties).
const InputTensor& closest_member(const ExplicitLanguage& L, const InputTensor& X, const Pmf& D);
// d_U(X'_Q, L'_Q) by enumeration of L.
Rational virtual_uniform_distance(const ExplicitLanguage& L, const InputTensor& X, const UniformOracleMap& Q);

// ---- fixtures -------------------------------------------------------------

enum class ProductProfile { Uniform, RowConcentrated, DyadicRandom };

struct ProductFixture {
  ProductDistribution D;
  SamplingCircuit C;
  std::vector<size_t> factor_input_bits;
};

// k must be a power of two. Factor masses are dyadic, so the circuit
// realizes the product exactly.
ProductFixture gen_product_fixture(size_t k, size_t m, ProductProfile profile, uint64_t seed);
ProductProfile parse_profile(const std::string& name);

}  // namespace dfipp
