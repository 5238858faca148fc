#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dfipp/rational.hpp"
#include "dfipp/rng.hpp"
#include "dfipp/tensor.hpp"

namespace dfipp {

// Exact probability mass function over a shaped cell set.
class Pmf {
 public:
  Pmf(std::vector<size_t> dims, std::vector<Rational> masses);
  static Pmf uniform(std::vector<size_t> dims);
  static Pmf point(std::vector<size_t> dims, size_t cell);
  // masses w_i / sum(w)
  static Pmf from_weights(std::vector<size_t> dims, const std::vector<uint64_t>& weights);

  const std::vector<size_t>& dims() const { return dims_; }
  size_t size() const { return masses_.size(); }
  const Rational& operator[](size_t i) const { return masses_[i]; }
  const std::vector<Rational>& masses() const { return masses_; }

  friend bool operator==(const Pmf& a, const Pmf& b) { return a.dims_ == b.dims_ && a.masses_ == b.masses_; }

 private:
  std::vector<size_t> dims_;
  std::vector<Rational> masses_;
};

// Cumulative 64-bit fixed-point table; only the RNG path leaves exact
// arithmetic.
class Sampler {
 public:
  explicit Sampler(const Pmf& p);
  size_t draw(Rng& rng) const;
  size_t size() const { return cum_.size(); }

 private:
  std::vector<unsigned __int128> cum_;
};

struct ProductDistribution {
  std::vector<Pmf> factors;

  size_t k() const { return factors.empty() ? 0 : factors[0].size(); }
  size_t m() const { return factors.size(); }
  Pmf joint() const;
  // product of factors first..m-1
  Pmf tail(size_t first) const;
};

enum class GateOp { And, Xor, Not };

struct Gate {
  GateOp op;
  size_t a;
  size_t b;  // ignored for Not
};

// Wires 0..inputs-1 are the random input bits, gate g drives wire inputs+g.
// Output wires are read most significant first.
class SamplingCircuit {
 public:
  SamplingCircuit(size_t inputs, std::vector<Gate> gates, std::vector<size_t> outputs);

  size_t input_bits() const { return inputs_; }
  size_t output_bits() const { return outputs_.size(); }
  const std::vector<Gate>& gates() const { return gates_; }
  const std::vector<size_t>& outputs() const { return outputs_; }

  uint64_t eval(uint64_t input) const;
  uint64_t sample(Rng& rng) const;
  // keeps output wires [first, first+count)
  SamplingCircuit project(size_t first, size_t count) const;

 private:
  size_t inputs_;
  std::vector<Gate> gates_;
  std::vector<size_t> outputs_;
};

constexpr size_t kCircuitEnumerationBits = 20;

Pmf circuit_pmf(const SamplingCircuit& c, std::vector<size_t> dims,
                size_t max_input_bits = kCircuitEnumerationBits);

struct DispersionReport {
  Rational rho;
  size_t cell = 0;
  size_t dim = 0;
};

DispersionReport dispersion_rho(const Pmf& D);
Pmf marginal_first(const Pmf& D);

struct GranularitySet {
  std::vector<uint64_t> counts;
  uint64_t total() const;
};

GranularitySet granularise(const Pmf& p);
// Same formula for claimed masses summing to at most 1.
GranularitySet granularise_masses(const std::vector<Rational>& p);
// row j gets mass b_j / sum(b)
Pmf granular_pmf(const GranularitySet& B);

InputTensor g_cat(const InputTensor& X);
// source row (0-based) of every output row of extend(., B)
std::vector<size_t> extension_rows(const GranularitySet& B);
InputTensor extend(const InputTensor& X, const GranularitySet& B);

// L1 form, no 1/2 factor.
Rational tv_distance(const Pmf& p, const Pmf& q);

// Q_i is a 1-based source index; n+1 names the appended zero coordinate.
struct UniformOracleMap {
  size_t n = 0;
  std::vector<size_t> Q;
};

UniformOracleMap make_uniform_oracle(const Pmf& p);

}  // namespace dfipp
