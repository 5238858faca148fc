#include "dfipp/product.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "dfipp/lemmas.hpp"

namespace dfipp {

namespace {

size_t log2_exact(size_t k) {
  if (k == 0 || (k & (k - 1)) != 0) throw std::invalid_argument("k must be a power of two");
  return static_cast<size_t>(std::countr_zero(k));
}

Rational pow2(size_t e) {
  mpz_class z = 1;
  z <<= static_cast<mp_bitcnt_t>(e);
  return Rational(z);
}

}  // namespace

std::vector<unsigned> set_lb_bucket_bits(const MarginalClaim& claim, size_t input_bits,
                                         std::optional<unsigned> override_bits) {
  const size_t k = claim.p.size();
  const Rational target = Rational(static_cast<unsigned long>(8 * k)) / (claim.delta * claim.tau * claim.tau);
  std::vector<unsigned> bits;
  for (const Rational& p : claim.p) {
    if (p <= 0) {
      bits.push_back(0);
      continue;
    }
    if (override_bits) {
      bits.push_back(static_cast<unsigned>(std::min<size_t>(*override_bits, input_bits)));
      continue;
    }
    Rational K = p * pow2(input_bits);
    unsigned b = 0;
    while (b < input_bits && K / pow2(b + 1) >= target) ++b;
    bits.push_back(b);
  }
  return bits;
}

bool AffineHash::zero_at(uint64_t x) const {
  for (size_t j = 0; j < rows.size(); ++j) {
    if (((std::popcount(rows[j] & x) & 1) ^ ((offset >> j) & 1)) != 0) return false;
  }
  return true;
}

std::vector<AffineHash> set_lb_send_hashes(Session& s, const std::vector<unsigned>& bits, size_t input_bits) {
  const uint64_t mask = input_bits >= 64 ? ~uint64_t{0} : (uint64_t{1} << input_bits) - 1;
  std::vector<AffineHash> hashes(bits.size());
  PayloadWriter w;
  for (size_t i = 0; i < bits.size(); ++i) {
    for (unsigned j = 0; j < bits[i]; ++j) {
      hashes[i].rows.push_back(s.coins().next() & mask);
      w.put(hashes[i].rows.back(), static_cast<unsigned>(input_bits));
    }
    hashes[i].offset = bits[i] == 0 ? 0 : s.coins().next() & ((uint64_t{1} << bits[i]) - 1);
    w.put(hashes[i].offset, bits[i]);
  }
  s.send(w.finish());
  return hashes;
}

std::vector<AffineHash> set_lb_read_hashes(PayloadReader& r, const std::vector<unsigned>& bits, size_t input_bits) {
  std::vector<AffineHash> hashes(bits.size());
  for (size_t i = 0; i < bits.size(); ++i) {
    for (unsigned j = 0; j < bits[i]; ++j) hashes[i].rows.push_back(r.get(static_cast<unsigned>(input_bits)));
    hashes[i].offset = r.get(bits[i]);
  }
  return hashes;
}

void set_lb_write_witnesses(PayloadWriter& w, const SamplingCircuit& C, const std::vector<AffineHash>& hashes) {
  const size_t L = C.input_bits();
  if (L > kCircuitEnumerationBits) throw std::length_error("circuit input arity exceeds enumeration budget");
  std::vector<std::vector<uint64_t>> lists(hashes.size());
  for (uint64_t x = 0; x < (uint64_t{1} << L); ++x) {
    uint64_t y = C.eval(x);
    if (y < hashes.size() && hashes[y].zero_at(x)) lists[y].push_back(x);
  }
  for (const auto& l : lists) {
    w.put(l.size(), static_cast<unsigned>(L + 1));
    for (uint64_t x : l) w.put(x, static_cast<unsigned>(L));
  }
}

Verdict set_lb_check_witnesses(PayloadReader& r, const SamplingCircuit& C, const MarginalClaim& claim,
                               const std::vector<unsigned>& bits, const std::vector<AffineHash>& hashes) {
  const size_t L = C.input_bits();
  for (size_t i = 0; i < claim.p.size(); ++i) {
    uint64_t count = r.get(static_cast<unsigned>(L + 1));
    if (count > (uint64_t{1} << L)) return Verdict::reject("witness");
    int64_t prev = -1;
    for (uint64_t c = 0; c < count; ++c) {
      uint64_t x = r.get(static_cast<unsigned>(L));
      if (static_cast<int64_t>(x) <= prev || C.eval(x) != i || !hashes[i].zero_at(x)) return Verdict::reject("witness");
      prev = static_cast<int64_t>(x);
    }
    Rational need = (1 - claim.tau / 2) * claim.p[i] * pow2(L) / pow2(bits[i]);
    if (Rational(static_cast<unsigned long>(count)) < need) return Verdict::reject("lower-bound");
  }
  return Verdict::accept();
}

Verdict set_lower_bound_verifier(Session& s, const SamplingCircuit& C, const MarginalClaim& claim,
                                 std::optional<unsigned> override_bits) {
  auto bits = set_lb_bucket_bits(claim, C.input_bits(), override_bits);
  auto hashes = set_lb_send_hashes(s, bits, C.input_bits());
  Payload msg = s.receive();
  PayloadReader r(msg);
  Verdict v = set_lb_check_witnesses(r, C, claim, bits, hashes);
  if (v.accepted) r.expect_end();
  return v;
}

Payload SetLowerBoundProver::respond(const Transcript& t) {
  auto bits = set_lb_bucket_bits(claim_, C_.input_bits(), override_);
  PayloadReader r(t.messages.back().payload);
  auto hashes = set_lb_read_hashes(r, bits, C_.input_bits());
  PayloadWriter w;
  set_lb_write_witnesses(w, C_, hashes);
  return w.finish();
}

SessionResult run_set_lower_bound(const SamplingCircuit& C, const MarginalClaim& claim, ProverStrategy& prover,
                                  uint64_t seed, std::optional<unsigned> override_bits) {
  OracleHandles h{nullptr, nullptr, &C};
  return run_session([&](Session& s) { return set_lower_bound_verifier(s, C, claim, override_bits); }, prover, h,
                     seed);
}

std::vector<uint64_t> circuit_counts(const SamplingCircuit& C, size_t k) {
  if (C.input_bits() > kCircuitEnumerationBits) throw std::length_error("circuit input arity exceeds enumeration budget");
  std::vector<uint64_t> counts(k, 0);
  for (uint64_t x = 0; x < (uint64_t{1} << C.input_bits()); ++x) {
    uint64_t y = C.eval(x);
    if (y >= k) throw std::out_of_range("circuit output outside the support");
    ++counts[y];
  }
  return counts;
}

size_t whitebox_kappa(size_t k, size_t r) {
  double v = 32.0 * std::log2(8.0 * static_cast<double>(k)) * std::log2(static_cast<double>(std::max<size_t>(r, 2)));
  return std::max<size_t>(1, static_cast<size_t>(std::ceil(v - 1e-9)));
}

SamplingCircuit factor_circuit(const SamplingCircuit& C, size_t k, size_t factor) {
  size_t b = log2_exact(k);
  return C.project(factor * b, b);
}

SamplingCircuit tail_circuit(const SamplingCircuit& C, size_t k, size_t first_factor, size_t m) {
  size_t b = log2_exact(k);
  return C.project(first_factor * b, (m - first_factor) * b);
}

Verdict whitebox_verifier(Session& s, const WhiteboxParams& p, WhiteboxTrace* trace) {
  const PvalInstance& inst = p.inst;
  inst.validate();
  const PrimeField& f = inst.field;
  const size_t k = inst.k, m = inst.m;
  const SamplingCircuit* C = s.oracles().circuit;
  if (!C) throw std::invalid_argument("white-box protocol needs the circuit handle");
  if (C->output_bits() != m * log2_exact(k)) throw std::invalid_argument("circuit does not output m symbols");
  if (p.r > m) throw std::invalid_argument("r exceeds the number of dimensions");
  WhiteboxTrace local;
  WhiteboxTrace& tr = trace ? *trace : local;
  const size_t K = 8 * k;
  tr.fold.kappa = p.kappa_override ? *p.kappa_override : whitebox_kappa(k, p.r);
  tr.fold.classes = weight_classes(K, tr.fold.kappa);
  for (size_t a = 1; a <= tr.fold.classes; ++a) {
    if ((size_t{1} << a) * tr.fold.kappa > K) {
      tr.fold.notes.push_back("weight of class " + std::to_string(a) + " clamped to 8k=" + std::to_string(K));
    }
  }
  const Rational delta = p.delta ? *p.delta : Rational(1, static_cast<unsigned long>(20 * std::max<size_t>(p.r, 1)));
  const size_t L = C->input_bits();

  std::vector<FoldTuple> tuples{FoldTuple{{}, inst.J, inst.v}};
  for (size_t round = 0; round < p.r; ++round) {
    Payload msg = s.receive();
    PayloadReader r(msg);
    MarginalClaim claim{{}, p.tau, delta};
    uint64_t total = 0;
    for (size_t i = 0; i < k; ++i) {
      uint64_t c = r.get(static_cast<unsigned>(L + 1));
      total += c;
      claim.p.push_back(Rational(static_cast<unsigned long>(c)) / pow2(L));
    }
    r.expect_end();
    if (total > (uint64_t{1} << L)) return Verdict::reject("claim");
    tr.claims.push_back(claim.p);

    SamplingCircuit Cf = factor_circuit(*C, k, round);
    auto bits = set_lb_bucket_bits(claim, L, p.hash_bits_override);
    auto hashes = set_lb_send_hashes(s, bits, L);
    Payload answer = s.receive();
    PayloadReader ra(answer);
    Verdict lv = set_lb_check_witnesses(ra, Cf, claim, bits, hashes);
    tr.learner_verdicts.push_back(lv.accepted ? "accept" : lv.reject_reason);
    if (!lv.accepted) return lv;

    GranularitySet B = granularise_masses(claim.p);
    tr.granularities.push_back(B);
    FoldConfig cfg{f, k, K, granular_row_map(B), tr.fold.kappa, tr.fold.classes};
    Verdict v = fold_phase_verifier(s, cfg, tuples, ra, round == 0 ? &tr.fold.first_phase : nullptr);
    if (!v.accepted) return v;
  }
  tr.fold.queries_before_leaf_phase = s.ledger().queries;
  SamplingCircuit tail = tail_circuit(*C, k, p.r, m);
  LeafPhaseConfig lc{f, k, m, p.r, p.eps, 16, LeafSource::Circuit, &tail};
  return leaf_phase_verifier(s, lc, tuples, tr.fold);
}

WhiteboxProver::WhiteboxProver(const InputTensor& committed, const SamplingCircuit& C, const WhiteboxParams& p)
    : FoldProver(committed, p.inst, p.r, p.kappa_override ? *p.kappa_override : whitebox_kappa(p.inst.k, p.r)),
      C_(C),
      p_(p) {}

Payload WhiteboxProver::respond(const Transcript& t) {
  const size_t L = C_.input_bits();
  if (state_ == 2) {
    absorb_vectors(t.messages.back().payload, row_map_, 8 * k_);
    ++round_;
    state_ = 0;
  }
  if (round_ >= p_.r) return send_leaves();
  SamplingCircuit Cf = factor_circuit(C_, k_, round_);
  if (state_ == 0) {
    auto counts = circuit_counts(Cf, k_);
    claim_ = MarginalClaim{{}, p_.tau, p_.delta ? *p_.delta : Rational(1, static_cast<unsigned long>(20 * std::max<size_t>(p_.r, 1)))};
    PayloadWriter w;
    for (uint64_t c : counts) {
      w.put(c, static_cast<unsigned>(L + 1));
      claim_.p.push_back(Rational(static_cast<unsigned long>(c)) / pow2(L));
    }
    row_map_ = granular_row_map(granularise_masses(claim_.p));
    state_ = 1;
    return w.finish();
  }
  auto bits = set_lb_bucket_bits(claim_, L, p_.hash_bits_override);
  PayloadReader r(t.messages.back().payload);
  auto hashes = set_lb_read_hashes(r, bits, L);
  PayloadWriter w;
  set_lb_write_witnesses(w, Cf, hashes);
  write_rows(w);
  state_ = 2;
  return w.finish();
}

SessionResult run_whitebox(const InputTensor& X, const SamplingCircuit& C, const WhiteboxParams& p,
                           ProverStrategy& prover, uint64_t seed, WhiteboxTrace* trace) {
  OracleHandles h{&X, nullptr, &C};
  return run_session([&](Session& s) { return whitebox_verifier(s, p, trace); }, prover, h, seed);
}

ProductDplReport check_product_dpl(const InputTensor& X, const ProductDistribution& D, const std::vector<Fe>& Yp,
                                   const PvalInstance& inst, const std::vector<Rational>& claims,
                                   const Rational& tau, const EnumerationOptions& opt) {
  const size_t k = inst.k;
  if (inst.m < 2 || D.m() != inst.m || D.k() != k || claims.size() != k) {
    throw std::invalid_argument("product check needs matching shapes and m >= 2");
  }
  ProductDplReport rep;
  rep.B = granularise_masses(claims);
  rep.claims_in_range = true;
  rep.granular_bound = true;
  for (size_t i = 0; i < k; ++i) {
    const Rational& d1 = D.factors[0][i];
    rep.claims_in_range = rep.claims_in_range && claims[i] >= (1 - tau) * d1 && claims[i] <= d1;
    rep.granular_bound = rep.granular_bound &&
                         ratio(rep.B.counts[i], 8 * k) >= claims[i] / 2;
  }
  rep.premise = column_check_passes(inst, Yp);
  if (!rep.premise) {
    rep.vacuous = true;
    return rep;
  }
  Pmf joint = D.joint();
  rep.gamma = dist_to_pval_bruteforce(X, inst, Metric::hybrid(joint, Pmf::uniform(X.dims)), opt);
  Pmf tail = D.tail(1);
  Metric metric = Metric::hybrid(tail, Pmf::uniform(tail.dims()));
  for (size_t j = 0; j < k; ++j) rep.rows.push_back(dist_to_pval_bruteforce(X.row(j), row_instance(inst, Yp, j), metric, opt));
  {
    PvalInstance zero = row_instance(inst, Yp, 0);
    std::fill(zero.v.begin(), zero.v.end(), inst.field.zero());
    rep.rows.push_back(dist_to_pval_bruteforce(InputTensor(inst.field, X.row_dims()), zero, metric, opt));
  }
  Rational lhs = 0;
  bool inf = false;
  for (size_t j = 0; j <= k; ++j) {
    if (rep.B.counts[j] == 0) continue;
    if (rep.rows[j].infinite) {
      inf = true;
      break;
    }
    lhs += Rational(static_cast<unsigned long>(rep.B.counts[j])) * rep.rows[j].value;
  }
  rep.lhs = inf ? Distance::inf() : Distance::of(lhs);
  rep.rhs = rep.gamma.infinite ? Distance::inf()
                               : Distance::of(Rational(static_cast<unsigned long>(2 * k)) * (1 - tau) * rep.gamma.value);
  rep.vacuous = !rep.rhs.infinite && rep.rhs.value == 0;
  rep.holds = rep.lhs >= rep.rhs;
  return rep;
}

Learner exact_learner(const Pmf& D) {
  return [D](Session&) -> std::optional<Pmf> { return D; };
}

Learner aborting_learner() {
  return [](Session&) -> std::optional<Pmf> { return std::nullopt; };
}

bool ExplicitLanguage::contains(const InputTensor& Y) const {
  return std::find(members.begin(), members.end(), Y) != members.end();
}

Fe VirtualInput::slot(const InputTensor& Y, size_t s) const {
  size_t q = map.Q[s];
  return q == map.n + 1 ? Fe{0} : Y.data[q - 1];
}

VirtualUniformIpp witness_uniform_ipp(const ExplicitLanguage& L) {
  return [L](Session& s, const VirtualInput& vin, const Rational& eps) {
    Payload msg = s.receive();
    PayloadReader r(msg);
    InputTensor Y(L.field, {L.n}, r.get_fes(L.field, L.n));
    r.expect_end();
    if (!L.contains(Y)) return Verdict::reject("language");
    uint64_t checks = ceil_u64(2 / eps);
    for (uint64_t c = 0; c < checks; ++c) {
      size_t slot = s.coins().below(vin.map.Q.size());
      size_t q = vin.map.Q[slot];
      // the appended zero coordinate is known without a query
      Fe x = q == vin.map.n + 1 ? Fe{0} : s.query(q - 1);
      if (x != vin.slot(Y, slot)) return Verdict::reject("uniform-check");
    }
    return Verdict::accept();
  };
}

Verdict learnable_verifier(Session& s, const Learner& learner, const VirtualUniformIpp& ipp, const Rational& eps) {
  std::optional<Pmf> Dt = learner(s);
  if (!Dt) return Verdict::reject("learner");
  VirtualInput vin{make_uniform_oracle(*Dt)};
  return ipp(s, vin, eps / 4);
}

Payload MemberProver::respond(const Transcript&) {
  PayloadWriter w;
  w.put_fes(Y_.field, Y_.data);
  return w.finish();
}

const InputTensor& closest_member(const ExplicitLanguage& L, const InputTensor& X, const Pmf& D) {
  if (L.members.empty()) throw std::invalid_argument("empty language");
  size_t best = 0;
  Rational best_d = dist(X, L.members[0], D);
  for (size_t i = 1; i < L.members.size(); ++i) {
    Rational d = dist(X, L.members[i], D);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return L.members[best];
}

Rational virtual_uniform_distance(const ExplicitLanguage& L, const InputTensor& X, const UniformOracleMap& Q) {
  VirtualInput vin{Q};
  Rational best = 2;
  for (const auto& Y : L.members) {
    uint64_t diff = 0;
    for (size_t s = 0; s < Q.Q.size(); ++s) diff += vin.slot(X, s) != vin.slot(Y, s);
    best = std::min(best, ratio(diff, Q.Q.size()));
  }
  return best;
}

namespace {

class CircuitBuilder {
 public:
  explicit CircuitBuilder(size_t inputs) : inputs_(inputs) {}
  size_t add(GateOp op, size_t a, size_t b = 0) {
    gates_.push_back(Gate{op, a, b});
    return inputs_ + gates_.size() - 1;
  }
  SamplingCircuit finish(std::vector<size_t> outputs) { return SamplingCircuit(inputs_, gates_, std::move(outputs)); }

 private:
  size_t inputs_;
  std::vector<Gate> gates_;
};

}  // namespace

ProductFixture gen_product_fixture(size_t k, size_t m, ProductProfile profile, uint64_t seed) {
  const size_t b = log2_exact(k);
  if (k < 2 || m == 0) throw std::invalid_argument("need k >= 2 and m >= 1");
  Rng rng(seed);
  std::vector<size_t> in_bits(m);
  for (size_t f = 0; f < m; ++f) {
    if (profile == ProductProfile::RowConcentrated && f == 0) {
      in_bits[f] = 1;
    } else if (profile == ProductProfile::DyadicRandom) {
      in_bits[f] = b + 2;
    } else {
      in_bits[f] = b;
    }
  }
  size_t total = 0;
  for (size_t x : in_bits) total += x;
  if (total > kCircuitEnumerationBits) throw std::length_error("fixture circuit exceeds the enumeration budget");

  CircuitBuilder cb(total);
  std::vector<size_t> outputs;
  ProductFixture fx{ProductDistribution{}, SamplingCircuit(1, {}, {}), in_bits};
  size_t offset = 0;
  for (size_t f = 0; f < m; ++f) {
    const size_t Lf = in_bits[f];
    const uint64_t cells = uint64_t{1} << Lf;
    std::vector<uint64_t> counts(k, 0);
    std::vector<size_t> symbol_of(cells);
    if (profile == ProductProfile::RowConcentrated && f == 0) {
      counts[0] = cells;
    } else if (profile == ProductProfile::DyadicRandom) {
      for (uint64_t u = 0; u < cells; ++u) ++counts[rng.below(k)];
    } else {
      std::fill(counts.begin(), counts.end(), 1);
    }
    for (uint64_t x = 0, i = 0, used = 0; x < cells; ++x) {
      while (used == counts[i]) {
        ++i;
        used = 0;
      }
      symbol_of[x] = i;
      ++used;
    }
    std::vector<Rational> masses;
    for (uint64_t c : counts) masses.push_back(ratio(c, cells));
    for (auto& q : masses) q.canonicalize();
    fx.D.factors.emplace_back(std::vector<size_t>{k}, masses);

    if (profile == ProductProfile::Uniform || (profile == ProductProfile::RowConcentrated && f > 0)) {
      // symbol = local input value
      for (size_t j = 0; j < b; ++j) outputs.push_back(offset + (b - 1 - j));
    } else {
      std::vector<size_t> neg(Lf);
      for (size_t i = 0; i < Lf; ++i) neg[i] = cb.add(GateOp::Not, offset + i);
      std::vector<size_t> minterm(cells);
      for (uint64_t x = 0; x < cells; ++x) {
        size_t w = (x & 1) ? offset : neg[0];
        for (size_t i = 1; i < Lf; ++i) w = cb.add(GateOp::And, w, ((x >> i) & 1) ? offset + i : neg[i]);
        minterm[x] = w;
      }
      const size_t zero = cb.add(GateOp::Xor, offset, offset);
      for (size_t j = 0; j < b; ++j) {
        size_t bit = b - 1 - j;
        // minterms are disjoint, so XOR acts as OR
        size_t acc = zero;
        for (uint64_t x = 0; x < cells; ++x) {
          if ((symbol_of[x] >> bit) & 1) acc = cb.add(GateOp::Xor, acc, minterm[x]);
        }
        outputs.push_back(acc);
      }
    }
    offset += Lf;
  }
  fx.C = cb.finish(std::move(outputs));
  return fx;
}

ProductProfile parse_profile(const std::string& name) {
  if (name == "uniform") return ProductProfile::Uniform;
  if (name == "row-concentrated") return ProductProfile::RowConcentrated;
  if (name == "dyadic-random") return ProductProfile::DyadicRandom;
  throw std::invalid_argument("unknown product profile: " + name);
}

}  // namespace dfipp
