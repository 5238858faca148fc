#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dfipp/folding.hpp"
#include "dfipp/language.hpp"

namespace dfipp {

// Y' is k x |J2| row-major, columns in split_points(J) order.
bool column_check_passes(const PvalInstance& inst, const std::vector<Fe>& Yp);

// Instance for row i: (J2, Y'[i, .]) over [k]^(m-1).
PvalInstance row_instance(const PvalInstance& inst, const std::vector<Fe>& Yp, size_t i);

// Distance preservation for one fold step:
//   sum_i mu_{D',U}(X[i,.], PVAL(J2, Y'[i,.])) >= (k/rho) mu_{D,U}(X, PVAL(J,v))
// with D' the first marginal. The implication is stated for every eps below
// the right-hand distance, which is the non-strict form checked here.
struct PreservationReport {
  bool premise = false;  // column check passed
  bool vacuous = false;  // premise fails or rhs is 0
  Distance mu;           // mu_{D,U}(X, PVAL(J,v))
  std::vector<Distance> rows;
  Distance lhs;
  Distance rhs;
  Rational rho;
  bool holds = true;
};

PreservationReport check_distance_preservation(const InputTensor& X, const Pmf& D, const std::vector<Fe>& Yp,
                                               const PvalInstance& inst, const EnumerationOptions& opt = {});

struct PreservationInstance {
  InputTensor X;
  Pmf D;
  PvalInstance inst;
  std::vector<Fe> Yp;
};

// Random X, J, Y' (v read off Y' so the column check passes) and D; D is
// uniform when `uniform_d`.
PreservationInstance random_preservation_instance(Rng& rng, const PrimeField& f, size_t k, size_t m, bool uniform_d);

// Two-subspace lemma. Spans are enumerated exactly; eps is taken just below
// the largest d(s, T) unless given.
struct SubspaceReport {
  bool vacuous = false;
  Rational max_distance;
  Rational eps;
  Rational exact_fraction;  // Pr_r[d(r,T) <= eps/2] over all of S
  uint64_t trials = 0;
  uint64_t close = 0;
  double fraction = 0;
  double bound = 0;  // 1/(|F|-1)
  double sigma = 0;
  bool holds = true;
};

SubspaceReport check_subspace_lemma(const PrimeField& f, const std::vector<std::vector<Fe>>& S_basis,
                                    const std::vector<std::vector<Fe>>& T_basis, const Metric& metric,
                                    uint64_t trials, uint64_t seed, std::optional<Rational> eps = std::nullopt);

// Row-selection and folding claims used in the fold soundness proof.
struct FoldSoundnessReport {
  bool vacuous = false;
  Rational eps;
  Rational rho;
  std::vector<Distance> row_eps;
  // some b selects a row set I whose distances sum high enough
  bool row_selection_found = false;
  size_t b = 0;
  std::vector<size_t> I;
  // support of z_{a*} meets I
  size_t a_star = 0;
  uint64_t trials = 0;
  uint64_t support_miss = 0;
  double support_bound = 0;
  // some class a keeps mu >= eps 2^a / (4 rho)
  uint64_t sound_fail = 0;
  double sound_bound = 0;
  bool holds = true;
};

FoldSoundnessReport check_fold_soundness_claims(const InputTensor& X, const Pmf& D, const std::vector<Fe>& Yp,
                                     const PvalInstance& inst, size_t kappa, uint64_t trials, uint64_t seed,
                                     const EnumerationOptions& opt = {});

// Frequency of relative min distance < 2 eps over uniformly drawn J of size
// ceil(2 eps n (log2 n + log2 |F|) + 4), with v = P_W(J) for a random W.
struct MinDistanceReport {
  size_t t = 0;
  uint64_t draws = 0;
  uint64_t hits = 0;
  double frequency = 0;
  double bound = 0.1;
  double sigma = 0;
  bool holds = true;
};

size_t random_pval_claim_count(size_t n, size_t q, const Rational& eps);
MinDistanceReport check_random_pval_min_distance(const PrimeField& f, size_t k, size_t m, const Rational& eps,
                                                 uint64_t draws, uint64_t seed, const EnumerationOptions& opt = {});

struct ViolationReport {
  uint64_t checked = 0;
  uint64_t violations = 0;
  std::string first_violation;
  bool holds() const { return violations == 0; }
};

// sum a = 8n and a_i / 8n >= p_i / 2
ViolationReport check_granular_counts(uint64_t trials, uint64_t seed);
// d_{D'}(g_cat X, g_cat Y) >= d_p(X, Y) / 2 with D' the granular distribution
ViolationReport check_granular_distance(uint64_t trials, uint64_t seed);
// rho(first marginal) <= rho(D)
ViolationReport check_marginal_dispersion(uint64_t trials, uint64_t seed);
// d_D(X,Y) <= tv(D,D') + d_{D'}(X,Y)
ViolationReport check_tv_shift(uint64_t trials, uint64_t seed);

Pmf random_pmf(Rng& rng, std::vector<size_t> dims, bool allow_zeros = true);

}  // namespace dfipp
