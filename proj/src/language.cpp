#include "dfipp/language.hpp"

#include <omp.h>

#include <limits>

namespace dfipp {

Metric::Component Metric::scale(const Pmf& D) {
  mpz_class den = 1;
  for (const auto& q : D.masses()) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), q.get_den_mpz_t());
  if (!den.fits_ulong_p()) throw std::overflow_error("common mass denominator exceeds 64 bits");
  Component c;
  c.den = den.get_ui();
  c.w.reserve(D.size());
  for (const auto& q : D.masses()) {
    mpz_class w = q.get_num() * (den / q.get_den());
    c.w.push_back(w.get_ui());
  }
  return c;
}

Metric Metric::of(const Pmf& D) {
  Metric m;
  m.size_ = D.size();
  m.comps_.push_back(scale(D));
  return m;
}

Metric Metric::uniform(std::vector<size_t> dims) { return of(Pmf::uniform(std::move(dims))); }

Metric Metric::hybrid(const Pmf& D1, const Pmf& D2) {
  if (D1.size() != D2.size()) throw std::invalid_argument("hybrid components differ in size");
  Metric m;
  m.size_ = D1.size();
  m.comps_.push_back(scale(D1));
  m.comps_.push_back(scale(D2));
  return m;
}

Rational Metric::distance(const InputTensor& X, const InputTensor& Y) const {
  if (X.size() != size_ || Y.size() != size_) throw std::invalid_argument("tensor size differs from metric");
  Rational best = 0;
  for (const auto& c : comps_) {
    uint64_t num = 0;
    for (size_t i = 0; i < size_; ++i) {
      if (X.data[i] != Y.data[i]) num += c.w[i];
    }
    Rational d(mpz_class(std::to_string(num)), mpz_class(std::to_string(c.den)));
    d.canonicalize();
    if (d > best) best = d;
  }
  return best;
}

Rational dist(const InputTensor& X, const InputTensor& Y, const Pmf& D) {
  if (X.dims != Y.dims || X.size() != D.size()) throw std::invalid_argument("shape mismatch");
  Rational s = 0;
  for (size_t i = 0; i < X.size(); ++i) {
    if (X.data[i] != Y.data[i]) s += D[i];
  }
  return s;
}

Rational hybrid_dist(const InputTensor& X, const InputTensor& Y, const Pmf& D1, const Pmf& D2) {
  Rational a = dist(X, Y, D1);
  Rational b = dist(X, Y, D2);
  return a > b ? a : b;
}

bool ball_membership(const InputTensor& X, const InputTensor& Y, const Pmf& D, const Rational& eps) {
  return dist(X, Y, D) < eps;
}

uint64_t candidate_count(uint64_t q, size_t cells, uint64_t budget) {
  unsigned __int128 c = 1;
  for (size_t i = 0; i < cells; ++i) {
    c *= q;
    if (c > budget) {
      throw BudgetExceeded("enumeration of " + std::to_string(q) + "^" + std::to_string(cells) +
                           " candidates exceeds budget " + std::to_string(budget));
    }
  }
  return static_cast<uint64_t>(c);
}

namespace {

struct Constraints {
  uint64_t p;
  size_t n;
  std::vector<std::vector<uint64_t>> A;
  std::vector<uint64_t> v;

  explicit Constraints(const PvalInstance& inst) : p(inst.field.modulus()), n(inst.n()) {
    inst.validate();
    for (size_t r = 0; r < inst.J.size(); ++r) {
      auto c = lde_coefficients(inst.field, inst.k, inst.m, inst.J[r]);
      std::vector<uint64_t> row(c.size());
      for (size_t i = 0; i < c.size(); ++i) row[i] = c[i].v;
      A.push_back(std::move(row));
      v.push_back(inst.v[r].v);
    }
  }

  uint64_t eval(size_t r, const std::vector<uint64_t>& W) const {
    uint64_t s = 0;
    for (size_t i = 0; i < n; ++i) {
      if (A[r][i] == 0 || W[i] == 0) continue;
      uint64_t term = static_cast<uint64_t>((static_cast<unsigned __int128>(A[r][i]) * W[i]) % p);
      s += term;
      if (s >= p || s < term) s -= p;
    }
    return s;
  }

  bool member(const std::vector<uint64_t>& W) const {
    for (size_t r = 0; r < A.size(); ++r) {
      if (eval(r, W) != v[r]) return false;
    }
    return true;
  }

  bool kernel(const std::vector<uint64_t>& W) const {
    for (size_t r = 0; r < A.size(); ++r) {
      if (eval(r, W) != 0) return false;
    }
    return true;
  }
};

void decode(uint64_t index, uint64_t q, std::vector<uint64_t>& W) {
  for (size_t i = W.size(); i-- > 0;) {
    W[i] = index % q;
    index /= q;
  }
}

struct Best {
  bool found = false;
  uint64_t num = 0;
  uint64_t den = 1;
  uint64_t index = 0;

  bool improves_on(const Best& o) const {
    if (!found) return false;
    if (!o.found) return true;
    unsigned __int128 l = static_cast<unsigned __int128>(num) * o.den;
    unsigned __int128 r = static_cast<unsigned __int128>(o.num) * den;
    if (l != r) return l < r;
    return index < o.index;
  }
};

}  // namespace

ClosestMember closest_pval_member(const InputTensor& X, const PvalInstance& inst, const Metric& metric,
                                  const EnumerationOptions& opt) {
  if (!(X.field == inst.field) || X.size() != inst.n() || X.order() != inst.m) {
    throw std::invalid_argument("tensor does not match instance");
  }
  if (metric.size() != X.size()) throw std::invalid_argument("metric size differs from tensor");
  const uint64_t q = inst.field.modulus();
  const uint64_t total = candidate_count(q, X.size(), opt.budget);
  const Constraints C(inst);
  const size_t n = X.size();
  std::vector<uint64_t> x(n);
  for (size_t i = 0; i < n; ++i) x[i] = X.data[i].v;

  auto score = [&](const std::vector<uint64_t>& W, uint64_t index) {
    Best b;
    b.found = true;
    b.index = index;
    for (size_t c = 0; c < metric.components(); ++c) {
      uint64_t num = 0;
      for (size_t i = 0; i < n; ++i) {
        if (W[i] != x[i]) num += metric.weight(c, i);
      }
      uint64_t den = metric.denominator(c);
      if (c == 0 || static_cast<unsigned __int128>(num) * b.den > static_cast<unsigned __int128>(b.num) * den) {
        b.num = num;
        b.den = den;
      }
    }
    return b;
  };

  Best best;
  if (opt.exec == Exec::Serial) {
    std::vector<uint64_t> W(n);
    for (uint64_t idx = 0; idx < total; ++idx) {
      decode(idx, q, W);
      if (!C.member(W)) continue;
      Best b = score(W, idx);
      if (b.improves_on(best)) best = b;
    }
  } else {
#pragma omp parallel
    {
      Best local;
      std::vector<uint64_t> W(n);
#pragma omp for schedule(static)
      for (int64_t s = 0; s < static_cast<int64_t>(total); ++s) {
        uint64_t idx = static_cast<uint64_t>(s);
        decode(idx, q, W);
        if (!C.member(W)) continue;
        Best b = score(W, idx);
        if (b.improves_on(local)) local = b;
      }
#pragma omp critical
      {
        if (local.improves_on(best)) best = local;
      }
    }
  }

  ClosestMember out;
  if (!best.found) {
    out.distance = Distance::inf();
    return out;
  }
  Rational d(mpz_class(std::to_string(best.num)), mpz_class(std::to_string(best.den)));
  d.canonicalize();
  out.distance = Distance::of(d);
  std::vector<uint64_t> W(n);
  decode(best.index, q, W);
  std::vector<Fe> data(n);
  for (size_t i = 0; i < n; ++i) data[i] = Fe{W[i]};
  out.witness = InputTensor(X.field, X.dims, std::move(data));
  return out;
}

Distance dist_to_pval_bruteforce(const InputTensor& X, const PvalInstance& inst, const Metric& metric,
                                 const EnumerationOptions& opt) {
  return closest_pval_member(X, inst, metric, opt).distance;
}

Distance pval_min_distance(const PvalInstance& inst, const EnumerationOptions& opt) {
  const uint64_t q = inst.field.modulus();
  const size_t n = inst.n();
  const uint64_t total = candidate_count(q, n, opt.budget);
  const Constraints C(inst);
  bool nonempty = false;
  size_t min_weight = std::numeric_limits<size_t>::max();

  auto visit = [&](const std::vector<uint64_t>& W, bool& member, size_t& weight) {
    member = C.member(W);
    weight = 0;
    for (uint64_t w : W) weight += (w != 0);
    if (weight == 0 || !C.kernel(W)) weight = std::numeric_limits<size_t>::max();
  };

  if (opt.exec == Exec::Serial) {
    std::vector<uint64_t> W(n);
    for (uint64_t idx = 0; idx < total; ++idx) {
      decode(idx, q, W);
      bool member;
      size_t weight;
      visit(W, member, weight);
      nonempty = nonempty || member;
      if (weight < min_weight) min_weight = weight;
    }
  } else {
#pragma omp parallel
    {
      bool local_nonempty = false;
      size_t local_min = std::numeric_limits<size_t>::max();
      std::vector<uint64_t> W(n);
#pragma omp for schedule(static)
      for (int64_t s = 0; s < static_cast<int64_t>(total); ++s) {
        decode(static_cast<uint64_t>(s), q, W);
        bool member;
        size_t weight;
        visit(W, member, weight);
        local_nonempty = local_nonempty || member;
        if (weight < local_min) local_min = weight;
      }
#pragma omp critical
      {
        nonempty = nonempty || local_nonempty;
        if (local_min < min_weight) min_weight = local_min;
      }
    }
  }
  if (!nonempty || min_weight == std::numeric_limits<size_t>::max()) return Distance::inf();
  Rational d(static_cast<unsigned long>(min_weight), static_cast<unsigned long>(n));
  d.canonicalize();
  return Distance::of(d);
}

std::vector<InputTensor> enumerate_pval(const PvalInstance& inst, const EnumerationOptions& opt) {
  const uint64_t q = inst.field.modulus();
  const size_t n = inst.n();
  const uint64_t total = candidate_count(q, n, opt.budget);
  const Constraints C(inst);
  std::vector<InputTensor> out;
  std::vector<uint64_t> W(n);
  for (uint64_t idx = 0; idx < total; ++idx) {
    decode(idx, q, W);
    if (!C.member(W)) continue;
    std::vector<Fe> data(n);
    for (size_t i = 0; i < n; ++i) data[i] = Fe{W[i]};
    out.emplace_back(inst.field, std::vector<size_t>(inst.m, inst.k), std::move(data));
  }
  return out;
}

}  // namespace dfipp
