#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dfipp {

struct Fe {
  uint64_t v = 0;
  friend bool operator==(Fe a, Fe b) { return a.v == b.v; }
  friend bool operator!=(Fe a, Fe b) { return a.v != b.v; }
};

bool is_prime_u64(uint64_t n);

class PrimeField {
 public:
  explicit PrimeField(uint64_t modulus);

  uint64_t modulus() const { return p_; }
  // Width of one encoded element on the wire.
  unsigned bits() const { return bits_; }

  Fe of(uint64_t x) const { return Fe{x % p_}; }
  Fe of_int(int64_t x) const;
  Fe zero() const { return Fe{0}; }
  Fe one() const { return Fe{1 % p_}; }

  Fe add(Fe a, Fe b) const {
    uint64_t s = a.v + b.v;
    if (s >= p_ || s < a.v) s -= p_;
    return Fe{s};
  }
  Fe sub(Fe a, Fe b) const { return Fe{a.v >= b.v ? a.v - b.v : a.v + (p_ - b.v)}; }
  Fe neg(Fe a) const { return Fe{a.v == 0 ? 0 : p_ - a.v}; }
  Fe mul(Fe a, Fe b) const {
    return Fe{static_cast<uint64_t>((static_cast<unsigned __int128>(a.v) * b.v) % p_)};
  }
  Fe pow(Fe a, uint64_t e) const;
  Fe inv(Fe a) const;  // throws on zero
  Fe div(Fe a, Fe b) const { return mul(a, inv(b)); }

  bool contains(Fe a) const { return a.v < p_; }

  friend bool operator==(const PrimeField& a, const PrimeField& b) { return a.p_ == b.p_; }

 private:
  uint64_t p_;
  unsigned bits_;
};

// Zero-based identification of [k] with {0,..,k-1}; i is 1-based.
Fe canonical_embed(const PrimeField& f, size_t i, size_t k);

// Barycentric weights for the nodes 0..k-1.
class LagrangeBasis {
 public:
  LagrangeBasis(const PrimeField& f, size_t k);

  size_t k() const { return k_; }
  const PrimeField& field() const { return f_; }
  // L_0(t), ..., L_{k-1}(t)
  std::vector<Fe> at(Fe t) const;
  Fe eval(std::span<const Fe> values, Fe t) const;

 private:
  PrimeField f_;
  size_t k_;
  std::vector<Fe> w_;
};

Fe lagrange_eval_univariate(const PrimeField& f, std::span<const Fe> values, Fe t);

}  // namespace dfipp
