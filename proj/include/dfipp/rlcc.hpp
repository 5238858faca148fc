#pragma once

#include <functional>
#include <optional>

#include "dfipp/session.hpp"

namespace dfipp {

// Local corrector: returns the corrected value of coordinate i, or nullopt
// for the abort symbol. Queries go through the session.
struct CorrectorHandle {
  uint64_t queries = 0;  // t(n)
  Rational delta_r;
  std::function<std::optional<Fe>(Session&, size_t)> correct;
};

// Hadamard code over F_2: message a in {0,1}^l, codeword X_i = <a, i>.
std::vector<Fe> hadamard_encode(uint64_t a, size_t l);
InputTensor hadamard_codeword(uint64_t a, size_t l);

// X_{i xor r} + X_r for uniform r, exactly 2 queries; radius 1/6.
CorrectorHandle hadamard_corrector();

using MessagePredicate = std::function<bool(uint64_t a)>;

// Uniform IPP for {Hadamard(a) : allowed(a)}: the prover sends a, the
// verifier checks the predicate and ceil(2/eps) uniform positions.
Verdict hadamard_uniform_ipp(Session& s, size_t l, const MessagePredicate& allowed, const Rational& eps);

class HadamardProver : public ProverStrategy {
 public:
  HadamardProver(uint64_t message, size_t l) : a_(message), l_(l) {}
  Payload respond(const Transcript& t) override;

 private:
  uint64_t a_;
  size_t l_;
};

// Nearest message under D (ties to the smallest message).
uint64_t hadamard_decode(const InputTensor& X, const Pmf& D, size_t l);

constexpr size_t kRlccRepetitions = 4;

// Runs the uniform IPP, then `repetitions` rounds of ceil(1/eps) samples,
// rejecting when the corrector returns a value different from the sample.
// An abort is treated as no evidence.
Verdict rlcc_verifier(Session& s, const VerifierProgram& uniform_ipp, const CorrectorHandle& corrector,
                      const Rational& eps, size_t repetitions = kRlccRepetitions);

}  // namespace dfipp
