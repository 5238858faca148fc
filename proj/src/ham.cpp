#include "dfipp/ham.hpp"

#include <algorithm>
#include <memory>
#include <cmath>

namespace dfipp {

uint64_t ham_iterations(const Rational& eps, uint64_t c) {
  if (eps <= 0) throw std::invalid_argument("eps must be positive");
  return ceil_u64(Rational(static_cast<unsigned long>(c)) / eps);
}

Verdict ham_verifier(Session& s, const HamParams& p) {
  if (p.n == 0) throw std::invalid_argument("empty input");
  if (p.w > p.n) return Verdict::reject("range");
  const unsigned width = width_for(p.n);
  const uint64_t iters = ham_iterations(p.eps, p.c);
  for (uint64_t it = 0; it < iters; ++it) {
    auto smp = s.sample();
    const size_t target = smp.cell + 1;
    size_t L = 1, U = p.n;
    uint64_t v = p.w;
    while (L < U) {
      size_t mid = (L + U) / 2;
      Payload msg = s.receive();
      PayloadReader r(msg);
      uint64_t h0 = r.get(width);
      uint64_t h1 = r.get(width);
      r.expect_end();
      if (h0 > mid - L + 1 || h1 > U - mid) return Verdict::reject("range");
      if (h0 + h1 != v) return Verdict::reject("sum");
      bool right = target > mid;
      PayloadWriter w;
      w.put(right ? 1 : 0, 1);
      s.send(w.finish());
      if (right) {
        L = mid + 1;
        v = h1;
      } else {
        U = mid;
        v = h0;
      }
    }
    if (v != smp.value.v) return Verdict::reject("leaf");
  }
  return Verdict::accept();
}

HamSplit ham_counting_split(const InputTensor& committed) {
  std::vector<uint64_t> prefix(committed.size() + 1, 0);
  for (size_t i = 0; i < committed.size(); ++i) prefix[i + 1] = prefix[i] + (committed.data[i].v != 0);
  return [prefix](size_t L, size_t U, uint64_t) {
    size_t mid = (L + U) / 2;
    return std::make_pair(prefix[mid] - prefix[L - 1], prefix[U] - prefix[mid]);
  };
}

HamSplit ham_random_split(uint64_t seed) {
  auto rng = std::make_shared<Rng>(seed);
  return [rng](size_t L, size_t U, uint64_t v) {
    size_t mid = (L + U) / 2;
    uint64_t left = mid - L + 1, right = U - mid;
    uint64_t lo = v > right ? v - right : 0;
    uint64_t hi = std::min<uint64_t>(v, left);
    if (lo > hi) return std::make_pair(v, uint64_t{0});  // v itself out of range; nothing passes
    uint64_t h0 = lo + rng->below(hi - lo + 1);
    return std::make_pair(h0, v - h0);
  };
}

HamSplit ham_bad_sum_split() {
  return [](size_t L, size_t U, uint64_t v) {
    size_t mid = (L + U) / 2;
    if (v == 0) return std::make_pair(uint64_t{0}, uint64_t{1});
    return std::make_pair(std::min<uint64_t>(v - 1, mid - L + 1), uint64_t{0});
  };
}

HamProver::HamProver(size_t n, uint64_t w, HamSplit split) : n_(n), w_(w), split_(std::move(split)), U_(n), v_(w) {}

Payload HamProver::respond(const Transcript& t) {
  if (awaiting_bit_) {
    const Message& last = t.messages.back();
    PayloadReader r(last.payload);
    bool right = r.get(1) != 0;
    size_t mid = (L_ + U_) / 2;
    if (right) {
      L_ = mid + 1;
      v_ = h_[1];
    } else {
      U_ = mid;
      v_ = h_[0];
    }
    awaiting_bit_ = false;
  }
  if (L_ >= U_) {
    L_ = 1;
    U_ = n_;
    v_ = w_;
  }
  auto [h0, h1] = split_(L_, U_, v_);
  h_[0] = h0;
  h_[1] = h1;
  awaiting_bit_ = true;
  const unsigned width = width_for(n_);
  PayloadWriter w;
  uint64_t cap = width >= 64 ? UINT64_MAX : (uint64_t{1} << width) - 1;
  w.put(std::min(h0, cap), width);
  w.put(std::min(h1, cap), width);
  return w.finish();
}

SessionResult run_ham(const InputTensor& X, const Pmf& D, const HamParams& p, ProverStrategy& prover,
                      uint64_t seed) {
  OracleHandles h{&X, &D, nullptr};
  return run_session([&](Session& s) { return ham_verifier(s, p); }, prover, h, seed);
}

Verdict symmetric_verifier(Session& s, size_t n, const SymmetricPredicate& S, const Rational& eps, uint64_t c) {
  Payload msg = s.receive();
  PayloadReader r(msg);
  uint64_t w = r.get(width_for(n));
  r.expect_end();
  if (w > n || !S(w)) return Verdict::reject("predicate");
  return ham_verifier(s, HamParams{n, w, eps, c});
}

SymmetricProver::SymmetricProver(size_t n, uint64_t claimed_weight, HamSplit split)
    : n_(n), w_(claimed_weight), inner_(n, claimed_weight, std::move(split)) {}

Payload SymmetricProver::respond(const Transcript& t) {
  if (!sent_weight_) {
    sent_weight_ = true;
    PayloadWriter w;
    w.put(w_, width_for(n_));
    return w.finish();
  }
  return inner_.respond(t);
}

uint64_t hamming_weight(const InputTensor& X) {
  uint64_t c = 0;
  for (Fe x : X.data) c += (x.v != 0);
  return c;
}

Distance distance_to_hamming_slice(const InputTensor& X, const Pmf& D, uint64_t w) {
  if (X.size() != D.size()) throw std::invalid_argument("distribution size differs from input");
  if (w > X.size()) return Distance::inf();
  uint64_t ones = hamming_weight(X);
  bool raise = w > ones;
  uint64_t flips = raise ? w - ones : ones - w;
  std::vector<Rational> costs;
  for (size_t i = 0; i < X.size(); ++i) {
    if ((X.data[i].v != 0) != raise) costs.push_back(D[i]);
  }
  std::sort(costs.begin(), costs.end());
  Rational d = 0;
  for (uint64_t i = 0; i < flips; ++i) d += costs[i];
  return Distance::of(d);
}

HamLbFixture gen_ham_lb_fixture(size_t n, const Rational& eps, double exponent_outer, double exponent_inner) {
  auto sized = [n](double e) {
    auto raw = static_cast<size_t>(std::floor(std::pow(static_cast<double>(n), e) + 1e-9));
    return raw - raw % 6;
  };
  size_t s2 = sized(exponent_outer), s3 = sized(exponent_inner);
  if (s2 == 0 || s3 == 0 || s2 + s3 >= n) throw std::invalid_argument("degenerate intervals for this n");
  size_t s1 = n - s2 - s3;
  Rational base = 1 - 20 * eps;
  if (eps <= 0 || base < 0) throw std::invalid_argument("eps too large for valid masses");

  auto mk = [&](size_t i2, size_t i3) {
    std::vector<Rational> m(n);
    for (size_t i = 0; i < n; ++i) {
      if (i < s1) {
        m[i] = base / static_cast<unsigned long>(s1);
      } else if (i < s1 + s2) {
        m[i] = Rational(static_cast<unsigned long>(i2)) * eps / static_cast<unsigned long>(s2);
      } else {
        m[i] = Rational(static_cast<unsigned long>(i3)) * eps / static_cast<unsigned long>(s3);
      }
    }
    return Pmf({n}, std::move(m));
  };
  // ones on I1, then the first `a` of I2 and the first `b` of I3
  auto pattern = [&](size_t a, size_t b) {
    InputTensor T(PrimeField(2), {n});
    for (size_t i = 0; i < s1; ++i) T.data[i] = Fe{1};
    for (size_t i = 0; i < a; ++i) T.data[s1 + i] = Fe{1};
    for (size_t i = 0; i < b; ++i) T.data[s1 + s2 + i] = Fe{1};
    return T;
  };
  Pmf D1 = mk(12, 8), D2 = mk(8, 12);
  InputTensor X = pattern(s2 / 3, s3 / 2);
  InputTensor Y = pattern(s2 / 2, s3 / 3);
  auto ones_mass = [](const InputTensor& T, const Pmf& D) {
    Rational s = 0;
    for (size_t i = 0; i < T.size(); ++i) {
      if (T.data[i].v) s += D[i];
    }
    return s;
  };
  uint64_t w = hamming_weight(Y);
  Rational px = ones_mass(X, D1), py = ones_mass(Y, D2);
  Distance far = distance_to_hamming_slice(X, D1, w);
  return HamLbFixture{n, eps, exponent_outer, exponent_inner, s1, s2, s3, D1, D2, X, Y, w, px, py, far};
}

}  // namespace dfipp
