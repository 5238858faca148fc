#include "dfipp/distribution.hpp"

#include <algorithm>
#include <stdexcept>

namespace dfipp {

namespace {

size_t product(const std::vector<size_t>& dims) {
  size_t n = 1;
  for (size_t d : dims) n *= d;
  return n;
}

}  // namespace

Pmf::Pmf(std::vector<size_t> dims, std::vector<Rational> masses) : dims_(std::move(dims)), masses_(std::move(masses)) {
  if (masses_.size() != product(dims_)) throw std::invalid_argument("mass count does not match shape");
  Rational s = 0;
  for (auto& q : masses_) {
    q.canonicalize();
    if (q < 0) throw std::invalid_argument("negative mass");
    s += q;
  }
  if (s != 1) throw std::invalid_argument("masses sum to " + to_string(s) + ", not 1");
}

Pmf Pmf::uniform(std::vector<size_t> dims) {
  size_t n = product(dims);
  return Pmf(std::move(dims), std::vector<Rational>(n, Rational(1, n)));
}

Pmf Pmf::point(std::vector<size_t> dims, size_t cell) {
  size_t n = product(dims);
  if (cell >= n) throw std::out_of_range("point mass cell");
  std::vector<Rational> m(n, Rational(0));
  m[cell] = 1;
  return Pmf(std::move(dims), std::move(m));
}

Pmf Pmf::from_weights(std::vector<size_t> dims, const std::vector<uint64_t>& weights) {
  mpz_class total = 0;
  for (uint64_t w : weights) total += mpz_class(std::to_string(w));
  if (total == 0) throw std::invalid_argument("all weights zero");
  std::vector<Rational> m;
  m.reserve(weights.size());
  for (uint64_t w : weights) m.emplace_back(mpz_class(std::to_string(w)), total);
  return Pmf(std::move(dims), std::move(m));
}

Sampler::Sampler(const Pmf& p) : cum_(p.size()) {
  const mpz_class scale = mpz_class(1) << 64;
  Rational acc = 0;
  size_t last_positive = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0) last_positive = i;
  }
  for (size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (i >= last_positive) {
      cum_[i] = static_cast<unsigned __int128>(1) << 64;
      continue;
    }
    mpz_class v;
    mpz_class num = acc.get_num() * scale;
    mpz_fdiv_q(v.get_mpz_t(), num.get_mpz_t(), acc.get_den_mpz_t());
    // v < 2^64 here because acc < 1 before the last positive cell
    cum_[i] = static_cast<unsigned __int128>(mpz_get_ui(v.get_mpz_t()));
  }
}

size_t Sampler::draw(Rng& rng) const {
  unsigned __int128 u = rng.next();
  auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
  return static_cast<size_t>(it - cum_.begin());
}

Pmf ProductDistribution::joint() const { return tail(0); }

Pmf ProductDistribution::tail(size_t first) const {
  if (first > factors.size()) throw std::out_of_range("tail start");
  std::vector<size_t> dims;
  std::vector<Rational> masses{Rational(1)};
  for (size_t r = first; r < factors.size(); ++r) {
    const Pmf& f = factors[r];
    if (f.dims().size() != 1) throw std::invalid_argument("product factors must be one-dimensional");
    dims.push_back(f.size());
    std::vector<Rational> next;
    next.reserve(masses.size() * f.size());
    for (const auto& a : masses) {
      for (size_t i = 0; i < f.size(); ++i) next.push_back(a * f[i]);
    }
    masses.swap(next);
  }
  return Pmf(std::move(dims), std::move(masses));
}

SamplingCircuit::SamplingCircuit(size_t inputs, std::vector<Gate> gates, std::vector<size_t> outputs)
    : inputs_(inputs), gates_(std::move(gates)), outputs_(std::move(outputs)) {
  if (inputs_ > 63) throw std::invalid_argument("too many circuit inputs");
  for (size_t g = 0; g < gates_.size(); ++g) {
    size_t wire = inputs_ + g;
    if (gates_[g].a >= wire || (gates_[g].op != GateOp::Not && gates_[g].b >= wire)) {
      throw std::invalid_argument("gate reads a wire that is not yet driven");
    }
  }
  for (size_t o : outputs_) {
    if (o >= inputs_ + gates_.size()) throw std::invalid_argument("output wire out of range");
  }
  if (outputs_.size() > 63) throw std::invalid_argument("too many output bits");
}

uint64_t SamplingCircuit::eval(uint64_t input) const {
  std::vector<uint8_t> w(inputs_ + gates_.size());
  for (size_t i = 0; i < inputs_; ++i) w[i] = (input >> i) & 1;
  for (size_t g = 0; g < gates_.size(); ++g) {
    const Gate& G = gates_[g];
    uint8_t r = 0;
    switch (G.op) {
      case GateOp::And: r = w[G.a] & w[G.b]; break;
      case GateOp::Xor: r = w[G.a] ^ w[G.b]; break;
      case GateOp::Not: r = w[G.a] ^ 1; break;
    }
    w[inputs_ + g] = r;
  }
  uint64_t out = 0;
  for (size_t o : outputs_) out = (out << 1) | w[o];
  return out;
}

uint64_t SamplingCircuit::sample(Rng& rng) const {
  uint64_t x = inputs_ == 0 ? 0 : rng.next() & ((uint64_t{1} << inputs_) - 1);
  return eval(x);
}

SamplingCircuit SamplingCircuit::project(size_t first, size_t count) const {
  if (first + count > outputs_.size()) throw std::out_of_range("projection outside outputs");
  return SamplingCircuit(inputs_, gates_,
                         std::vector<size_t>(outputs_.begin() + static_cast<long>(first),
                                             outputs_.begin() + static_cast<long>(first + count)));
}

Pmf circuit_pmf(const SamplingCircuit& c, std::vector<size_t> dims, size_t max_input_bits) {
  if (c.input_bits() > max_input_bits) throw std::length_error("circuit input arity exceeds enumeration budget");
  size_t n = product(dims);
  std::vector<uint64_t> counts(n, 0);
  uint64_t total = uint64_t{1} << c.input_bits();
  for (uint64_t x = 0; x < total; ++x) {
    uint64_t y = c.eval(x);
    if (y >= n) throw std::out_of_range("circuit output outside the support");
    ++counts[y];
  }
  std::vector<Rational> m;
  m.reserve(n);
  for (uint64_t cnt : counts) m.emplace_back(mpz_class(std::to_string(cnt)), mpz_class(std::to_string(total)));
  return Pmf(std::move(dims), std::move(m));
}

DispersionReport dispersion_rho(const Pmf& D) {
  const auto& dims = D.dims();
  DispersionReport best{Rational(1), 0, 0};
  size_t n = D.size();
  size_t stride = n;
  for (size_t j = 0; j < dims.size(); ++j) {
    size_t d = dims[j];
    stride /= d;
    // lines along dimension j: fix every other coordinate
    for (size_t base = 0; base < n; ++base) {
      if ((base / stride) % d != 0) continue;
      Rational sum = 0;
      size_t arg = base;
      for (size_t t = 0; t < d; ++t) {
        size_t cell = base + t * stride;
        sum += D[cell];
        if (D[cell] > D[arg]) arg = cell;
      }
      if (sum == 0) continue;  // 0/0 counts as 1, never above the floor
      Rational ratio = Rational(static_cast<unsigned long>(d)) * D[arg] / sum;
      if (ratio > best.rho) best = DispersionReport{ratio, arg, j};
    }
  }
  return best;
}

Pmf marginal_first(const Pmf& D) {
  const auto& dims = D.dims();
  if (dims.size() < 2) throw std::invalid_argument("marginal needs at least two dimensions");
  std::vector<size_t> rest(dims.begin() + 1, dims.end());
  size_t w = D.size() / dims[0];
  std::vector<Rational> m(w, Rational(0));
  for (size_t t = 0; t < dims[0]; ++t) {
    for (size_t i = 0; i < w; ++i) m[i] += D[t * w + i];
  }
  return Pmf(std::move(rest), std::move(m));
}

uint64_t GranularitySet::total() const {
  uint64_t s = 0;
  for (uint64_t c : counts) s += c;
  return s;
}

GranularitySet granularise(const Pmf& p) { return granularise_masses(p.masses()); }

GranularitySet granularise_masses(const std::vector<Rational>& p) {
  size_t n = p.size();
  GranularitySet B;
  B.counts.reserve(n + 1);
  uint64_t used = 0;
  for (size_t i = 0; i < n; ++i) {
    if (p[i] < 0) throw std::invalid_argument("negative mass");
    uint64_t a = floor_u64(Rational(static_cast<unsigned long>(6 * n)) * p[i]) + 2;
    B.counts.push_back(a);
    used += a;
  }
  if (used > 8 * n) throw std::invalid_argument("masses sum above 1");
  B.counts.push_back(8 * n - used);
  return B;
}

Pmf granular_pmf(const GranularitySet& B) {
  std::vector<uint64_t> w = B.counts;
  return Pmf::from_weights({w.size()}, w);
}

InputTensor g_cat(const InputTensor& X) {
  if (X.order() == 0) throw std::invalid_argument("concatenation needs a first dimension");
  std::vector<size_t> dims = X.dims;
  dims[0] += 1;
  std::vector<Fe> data = X.data;
  data.resize(data.size() + X.row_size(), X.field.zero());
  return InputTensor(X.field, std::move(dims), std::move(data));
}

std::vector<size_t> extension_rows(const GranularitySet& B) {
  std::vector<size_t> rows;
  for (size_t j = 0; j < B.counts.size(); ++j) {
    if (B.counts[j] >= 1) rows.push_back(j);
  }
  for (size_t j = 0; j < B.counts.size(); ++j) {
    for (uint64_t c = 1; c < B.counts[j]; ++c) rows.push_back(j);
  }
  return rows;
}

InputTensor extend(const InputTensor& X, const GranularitySet& B) {
  if (X.order() == 0) throw std::invalid_argument("extension needs a first dimension");
  if (B.counts.size() != X.rows()) throw std::invalid_argument("granularity count differs from row count");
  if (B.total() == 0) throw std::invalid_argument("empty extension");
  auto src = extension_rows(B);
  std::vector<size_t> dims = X.dims;
  dims[0] = src.size();
  size_t w = X.row_size();
  std::vector<Fe> data;
  data.reserve(src.size() * w);
  for (size_t r : src) data.insert(data.end(), X.data.begin() + static_cast<long>(r * w), X.data.begin() + static_cast<long>((r + 1) * w));
  return InputTensor(X.field, std::move(dims), std::move(data));
}

Rational tv_distance(const Pmf& p, const Pmf& q) {
  if (p.size() != q.size()) throw std::invalid_argument("support size mismatch");
  Rational s = 0;
  for (size_t i = 0; i < p.size(); ++i) s += abs(Rational(p[i] - q[i]));
  return s;
}

UniformOracleMap make_uniform_oracle(const Pmf& p) {
  UniformOracleMap out;
  out.n = p.size();
  for (size_t r : extension_rows(granularise(p))) out.Q.push_back(r + 1);
  return out;
}

}  // namespace dfipp
