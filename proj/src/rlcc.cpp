#include "dfipp/rlcc.hpp"

#include <bit>

namespace dfipp {

std::vector<Fe> hadamard_encode(uint64_t a, size_t l) {
  std::vector<Fe> x(size_t{1} << l);
  for (size_t i = 0; i < x.size(); ++i) x[i] = Fe{static_cast<uint64_t>(std::popcount(a & i) & 1)};
  return x;
}

InputTensor hadamard_codeword(uint64_t a, size_t l) {
  return InputTensor(PrimeField(2), {size_t{1} << l}, hadamard_encode(a, l));
}

CorrectorHandle hadamard_corrector() {
  CorrectorHandle h;
  h.queries = 2;
  h.delta_r = Rational(1, 6);
  h.correct = [](Session& s, size_t i) -> std::optional<Fe> {
    size_t n = s.oracles().input->size();
    size_t r = s.coins().below(n);
    Fe a = s.query(i ^ r);
    Fe b = s.query(r);
    return Fe{a.v ^ b.v};
  };
  return h;
}

Verdict hadamard_uniform_ipp(Session& s, size_t l, const MessagePredicate& allowed, const Rational& eps) {
  Payload msg = s.receive();
  PayloadReader r(msg);
  uint64_t a = r.get(static_cast<unsigned>(l));
  r.expect_end();
  if (allowed && !allowed(a)) return Verdict::reject("message");
  const size_t n = size_t{1} << l;
  uint64_t checks = ceil_u64(2 / eps);
  for (uint64_t c = 0; c < checks; ++c) {
    size_t i = s.coins().below(n);
    if (s.query(i).v != static_cast<uint64_t>(std::popcount(a & i) & 1)) return Verdict::reject("uniform-check");
  }
  return Verdict::accept();
}

Payload HadamardProver::respond(const Transcript&) {
  PayloadWriter w;
  w.put(a_, static_cast<unsigned>(l_));
  return w.finish();
}

uint64_t hadamard_decode(const InputTensor& X, const Pmf& D, size_t l) {
  uint64_t best = 0;
  Rational best_d = 2;
  for (uint64_t a = 0; a < (uint64_t{1} << l); ++a) {
    auto c = hadamard_encode(a, l);
    Rational d = 0;
    for (size_t i = 0; i < c.size(); ++i) {
      if (c[i] != X.data[i]) d += D[i];
    }
    if (d < best_d) {
      best_d = d;
      best = a;
    }
  }
  return best;
}

Verdict rlcc_verifier(Session& s, const VerifierProgram& uniform_ipp, const CorrectorHandle& corrector,
                      const Rational& eps, size_t repetitions) {
  Verdict v = uniform_ipp(s);
  if (!v.accepted) return v;
  uint64_t per = ceil_u64(1 / eps);
  for (size_t rep = 0; rep < repetitions; ++rep) {
    for (uint64_t c = 0; c < per; ++c) {
      auto smp = s.sample();
      auto fixed = corrector.correct(s, smp.cell);
      if (fixed && *fixed != smp.value) return Verdict::reject("corrector");
    }
  }
  return Verdict::accept();
}

}  // namespace dfipp
