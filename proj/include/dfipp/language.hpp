#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dfipp/distribution.hpp"
#include "dfipp/exec.hpp"
#include "dfipp/rational.hpp"
#include "dfipp/tensor.hpp"

namespace dfipp {

constexpr uint64_t kDefaultEnumerationBudget = 10'000'000;

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Pointwise maximum of one or more mass-weighted disagreement measures.
// One component is d_D, two components give the hybrid metric.
class Metric {
 public:
  static Metric of(const Pmf& D);
  static Metric uniform(std::vector<size_t> dims);
  static Metric hybrid(const Pmf& D1, const Pmf& D2);

  size_t size() const { return size_; }
  size_t components() const { return comps_.size(); }
  Rational distance(const InputTensor& X, const InputTensor& Y) const;

  // mass of cell i in component c is weight(c, i) / denominator(c)
  uint64_t weight(size_t c, size_t i) const { return comps_[c].w[i]; }
  uint64_t denominator(size_t c) const { return comps_[c].den; }

 private:
  struct Component {
    std::vector<uint64_t> w;
    uint64_t den;
  };
  static Component scale(const Pmf& D);
  size_t size_ = 0;
  std::vector<Component> comps_;
};

Rational dist(const InputTensor& X, const InputTensor& Y, const Pmf& D);
Rational hybrid_dist(const InputTensor& X, const InputTensor& Y, const Pmf& D1, const Pmf& D2);
// strict: d_D(X,Y) < eps
bool ball_membership(const InputTensor& X, const InputTensor& Y, const Pmf& D, const Rational& eps);

struct EnumerationOptions {
  uint64_t budget = kDefaultEnumerationBudget;
  Exec exec = Exec::Parallel;
};

struct ClosestMember {
  Distance distance;
  std::optional<InputTensor> witness;  // smallest enumeration index among minimizers
};

// Exhaustive scan of F^(k^m); refuses with BudgetExceeded instead of
// approximating.
ClosestMember closest_pval_member(const InputTensor& X, const PvalInstance& inst, const Metric& metric,
                                  const EnumerationOptions& opt = {});
Distance dist_to_pval_bruteforce(const InputTensor& X, const PvalInstance& inst, const Metric& metric,
                                 const EnumerationOptions& opt = {});
// Minimum uniform distance between distinct members; +inf when |PVAL| <= 1.
// Members form a coset of the constraint kernel, so this is the minimum
// weight of a nonzero kernel vector whenever PVAL is nonempty.
Distance pval_min_distance(const PvalInstance& inst, const EnumerationOptions& opt = {});
std::vector<InputTensor> enumerate_pval(const PvalInstance& inst, const EnumerationOptions& opt = {});

uint64_t candidate_count(uint64_t q, size_t cells, uint64_t budget);

}  // namespace dfipp
