#include "dfipp/field.hpp"

#include <stdexcept>
#include <string>

namespace dfipp {

namespace {

uint64_t mulmod(uint64_t a, uint64_t b, uint64_t m) {
  return static_cast<uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

uint64_t powmod(uint64_t a, uint64_t e, uint64_t m) {
  uint64_t r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

}  // namespace

bool is_prime_u64(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t q : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % q == 0) return n == q;
  }
  uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // These bases are deterministic for all 64-bit n.
  for (uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

PrimeField::PrimeField(uint64_t modulus) : p_(modulus), bits_(0) {
  if (!is_prime_u64(modulus)) {
    throw std::invalid_argument("field modulus " + std::to_string(modulus) + " is not prime");
  }
  while (bits_ < 64 && (uint64_t{1} << bits_) < p_) ++bits_;
  if (bits_ == 0) bits_ = 1;
}

Fe PrimeField::of_int(int64_t x) const {
  if (x >= 0) return of(static_cast<uint64_t>(x));
  return neg(of(static_cast<uint64_t>(-(x + 1)) + 1));
}

Fe PrimeField::pow(Fe a, uint64_t e) const { return Fe{powmod(a.v, e, p_)}; }

Fe PrimeField::inv(Fe a) const {
  if (a.v == 0) throw std::domain_error("inverse of zero");
  return pow(a, p_ - 2);
}

Fe canonical_embed(const PrimeField& f, size_t i, size_t k) {
  if (k > f.modulus()) throw std::invalid_argument("k exceeds field size");
  if (i < 1 || i > k) throw std::out_of_range("index outside [k]");
  return Fe{static_cast<uint64_t>(i - 1)};
}

LagrangeBasis::LagrangeBasis(const PrimeField& f, size_t k) : f_(f), k_(k), w_(k) {
  if (k == 0 || k > f.modulus()) throw std::invalid_argument("need 1 <= k <= |F| interpolation nodes");
  for (size_t i = 0; i < k; ++i) {
    Fe d = f.one();
    for (size_t j = 0; j < k; ++j) {
      if (j != i) d = f.mul(d, f.sub(f.of(i), f.of(j)));
    }
    w_[i] = f.inv(d);
  }
}

std::vector<Fe> LagrangeBasis::at(Fe t) const {
  std::vector<Fe> out(k_, f_.zero());
  if (t.v < k_) {
    out[t.v] = f_.one();
    return out;
  }
  // l(t) = prod (t - j); L_i(t) = w_i l(t) / (t - i)
  Fe l = f_.one();
  std::vector<Fe> diff(k_);
  for (size_t j = 0; j < k_; ++j) {
    diff[j] = f_.sub(t, f_.of(j));
    l = f_.mul(l, diff[j]);
  }
  // batch inversion of the differences
  std::vector<Fe> prefix(k_);
  Fe acc = f_.one();
  for (size_t j = 0; j < k_; ++j) {
    prefix[j] = acc;
    acc = f_.mul(acc, diff[j]);
  }
  Fe inv_acc = f_.inv(acc);
  for (size_t j = k_; j-- > 0;) {
    Fe inv_j = f_.mul(inv_acc, prefix[j]);
    inv_acc = f_.mul(inv_acc, diff[j]);
    out[j] = f_.mul(f_.mul(w_[j], l), inv_j);
  }
  return out;
}

Fe LagrangeBasis::eval(std::span<const Fe> values, Fe t) const {
  if (values.size() != k_) throw std::invalid_argument("value count differs from k");
  auto basis = at(t);
  Fe s = f_.zero();
  for (size_t i = 0; i < k_; ++i) s = f_.add(s, f_.mul(values[i], basis[i]));
  return s;
}

Fe lagrange_eval_univariate(const PrimeField& f, std::span<const Fe> values, Fe t) {
  return LagrangeBasis(f, values.size()).eval(values, t);
}

}  // namespace dfipp
