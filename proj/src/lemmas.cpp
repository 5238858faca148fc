#include "dfipp/lemmas.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace dfipp {

bool column_check_passes(const PvalInstance& inst, const std::vector<Fe>& Yp) {
  PointSplit split = split_points(inst.J);
  const size_t cols = split.J2.size();
  if (Yp.size() != inst.k * cols) throw std::invalid_argument("Y' has the wrong size");
  LagrangeBasis basis(inst.field, inst.k);
  std::vector<Fe> column(inst.k);
  for (size_t p = 0; p < inst.J.size(); ++p) {
    size_t c = split.column_of[p];
    for (size_t i = 0; i < inst.k; ++i) column[i] = Yp[i * cols + c];
    if (basis.eval(column, inst.J[p][0]) != inst.v[p]) return false;
  }
  return true;
}

PvalInstance row_instance(const PvalInstance& inst, const std::vector<Fe>& Yp, size_t i) {
  PointSplit split = split_points(inst.J);
  const size_t cols = split.J2.size();
  std::vector<Fe> v(Yp.begin() + static_cast<long>(i * cols), Yp.begin() + static_cast<long>((i + 1) * cols));
  return PvalInstance{inst.field, inst.k, inst.m - 1, split.J2, v};
}

namespace {

Distance sum_distances(const std::vector<Distance>& ds) {
  Rational s = 0;
  for (const auto& d : ds) {
    if (d.infinite) return Distance::inf();
    s += d.value;
  }
  return Distance::of(s);
}

Metric row_metric(const Pmf& D) {
  Pmf Dm = marginal_first(D);
  return Metric::hybrid(Dm, Pmf::uniform(Dm.dims()));
}

std::vector<Distance> row_distances(const InputTensor& X, const Pmf& D, const std::vector<Fe>& Yp,
                                    const PvalInstance& inst, const EnumerationOptions& opt) {
  Metric metric = row_metric(D);
  std::vector<Distance> out;
  for (size_t i = 0; i < inst.k; ++i) {
    out.push_back(dist_to_pval_bruteforce(X.row(i), row_instance(inst, Yp, i), metric, opt));
  }
  return out;
}

double three_sigma_bound(double p, uint64_t trials) {
  p = std::clamp(p, 0.0, 1.0);
  return p + 3.0 * std::sqrt(p * (1 - p) / static_cast<double>(std::max<uint64_t>(trials, 1)));
}

}  // namespace

PreservationReport check_distance_preservation(const InputTensor& X, const Pmf& D, const std::vector<Fe>& Yp,
                                               const PvalInstance& inst, const EnumerationOptions& opt) {
  if (inst.m < 2) throw std::invalid_argument("distance preservation needs m >= 2");
  PreservationReport rep;
  rep.premise = column_check_passes(inst, Yp);
  rep.rho = dispersion_rho(D).rho;
  if (!rep.premise) {
    rep.vacuous = true;
    return rep;
  }
  rep.mu = dist_to_pval_bruteforce(X, inst, Metric::hybrid(D, Pmf::uniform(X.dims)), opt);
  rep.rows = row_distances(X, D, Yp, inst, opt);
  rep.lhs = sum_distances(rep.rows);
  rep.rhs = rep.mu.infinite ? Distance::inf()
                            : Distance::of(Rational(static_cast<unsigned long>(inst.k)) / rep.rho * rep.mu.value);
  rep.vacuous = !rep.rhs.infinite && rep.rhs.value == 0;
  rep.holds = rep.lhs >= rep.rhs;
  return rep;
}

Pmf random_pmf(Rng& rng, std::vector<size_t> dims, bool allow_zeros) {
  size_t n = 1;
  for (size_t d : dims) n *= d;
  std::vector<uint64_t> w(n);
  uint64_t total = 0;
  for (auto& x : w) {
    x = allow_zeros ? rng.below(5) : 1 + rng.below(4);
    total += x;
  }
  if (total == 0) w[rng.below(n)] = 1;
  return Pmf::from_weights(std::move(dims), w);
}

PreservationInstance random_preservation_instance(Rng& rng, const PrimeField& f, size_t k, size_t m, bool uniform_d) {
  InputTensor X = InputTensor::cube(f, k, m);
  for (auto& x : X.data) x = f.of(rng.below(f.modulus()));
  PvalInstance inst{f, k, m, {}, {}};
  size_t t = 1 + rng.below(3);
  for (size_t i = 0; i < t; ++i) {
    EvalPoint j(m);
    for (auto& c : j) c = f.of(rng.below(f.modulus()));
    inst.J.push_back(j);
  }
  PointSplit split = split_points(inst.J);
  const size_t cols = split.J2.size();
  std::vector<Fe> Yp(k * cols);
  if (rng.coin()) {
    for (auto& y : Yp) y = f.of(rng.below(f.modulus()));
  } else {
    // honest rows with one perturbed entry
    for (size_t i = 0; i < k; ++i) {
      InputTensor row = X.row(i);
      for (size_t c = 0; c < cols; ++c) Yp[i * cols + c] = lde_eval(row, split.J2[c]);
    }
    size_t e = rng.below(Yp.size());
    Yp[e] = f.add(Yp[e], f.of(rng.below(f.modulus())));
  }
  LagrangeBasis basis(f, k);
  std::vector<Fe> column(k);
  for (size_t p = 0; p < t; ++p) {
    for (size_t i = 0; i < k; ++i) column[i] = Yp[i * cols + split.column_of[p]];
    inst.v.push_back(basis.eval(column, inst.J[p][0]));
  }
  std::vector<size_t> dims(m, k);
  Pmf D = uniform_d ? Pmf::uniform(dims) : random_pmf(rng, dims);
  return PreservationInstance{std::move(X), std::move(D), std::move(inst), std::move(Yp)};
}

namespace {

std::vector<std::vector<uint64_t>> span_of(const PrimeField& f, size_t n, const std::vector<std::vector<Fe>>& basis) {
  std::set<std::vector<uint64_t>> seen;
  const size_t d = basis.size();
  const uint64_t q = f.modulus();
  size_t total = ipow(q, d);
  for (size_t idx = 0; idx < total; ++idx) {
    std::vector<uint64_t> v(n, 0);
    size_t c = idx;
    for (size_t b = 0; b < d; ++b) {
      Fe coef = f.of(c % q);
      c /= q;
      for (size_t i = 0; i < n; ++i) v[i] = f.add(Fe{v[i]}, f.mul(coef, basis[b][i])).v;
    }
    seen.insert(std::move(v));
  }
  return {seen.begin(), seen.end()};
}

}  // namespace

SubspaceReport check_subspace_lemma(const PrimeField& f, const std::vector<std::vector<Fe>>& S_basis,
                                    const std::vector<std::vector<Fe>>& T_basis, const Metric& metric,
                                    uint64_t trials, uint64_t seed, std::optional<Rational> eps) {
  const size_t n = metric.size();
  auto S = span_of(f, n, S_basis);
  auto T = span_of(f, n, T_basis);
  // every distance as a numerator over the common denominator L
  uint64_t L = 1;
  for (size_t c = 0; c < metric.components(); ++c) L = std::lcm(L, metric.denominator(c));
  auto scaled = [&](const std::vector<uint64_t>& a, const std::vector<uint64_t>& b) {
    uint64_t best = 0;
    for (size_t c = 0; c < metric.components(); ++c) {
      uint64_t s = 0;
      for (size_t i = 0; i < n; ++i) {
        if (a[i] != b[i]) s += metric.weight(c, i);
      }
      best = std::max(best, s * (L / metric.denominator(c)));
    }
    return best;
  };
  std::vector<uint64_t> dS(S.size());
  uint64_t max_d = 0;
  for (size_t i = 0; i < S.size(); ++i) {
    uint64_t m = UINT64_MAX;
    for (const auto& t : T) m = std::min(m, scaled(S[i], t));
    dS[i] = m;
    max_d = std::max(max_d, m);
  }
  SubspaceReport rep;
  rep.max_distance = ratio(max_d, L);
  rep.max_distance.canonicalize();
  rep.bound = 1.0 / static_cast<double>(f.modulus() - 1);
  rep.trials = trials;
  if (max_d == 0) {
    rep.vacuous = true;
    return rep;
  }
  // just below the maximum: distances are multiples of 1/L
  rep.eps = eps ? *eps : ratio(2 * max_d - 1, 2 * L);
  rep.eps.canonicalize();
  if (rep.eps >= rep.max_distance) throw std::invalid_argument("no point of S is eps-far from T");
  auto close = [&](uint64_t d) { return ratio(d, L) <= rep.eps / 2; };
  uint64_t exact = 0;
  for (uint64_t d : dS) exact += close(d);
  rep.exact_fraction = ratio(exact, S.size());
  rep.exact_fraction.canonicalize();
  Rng rng(seed);
  for (uint64_t t = 0; t < trials; ++t) rep.close += close(dS[rng.below(S.size())]);
  rep.fraction = trials ? static_cast<double>(rep.close) / static_cast<double>(trials) : 0.0;
  rep.sigma = std::sqrt(rep.bound * (1 - rep.bound) / static_cast<double>(std::max<uint64_t>(trials, 1)));
  rep.holds = rep.fraction <= rep.bound + 3 * rep.sigma &&
              rep.exact_fraction <= Rational(1, static_cast<unsigned long>(f.modulus() - 1));
  return rep;
}

FoldSoundnessReport check_fold_soundness_claims(const InputTensor& X, const Pmf& D, const std::vector<Fe>& Yp,
                                     const PvalInstance& inst, size_t kappa, uint64_t trials, uint64_t seed,
                                     const EnumerationOptions& opt) {
  const size_t k = inst.k;
  if (k < 2 || inst.m < 2) throw std::invalid_argument("fold_soundness claims need k >= 2 and m >= 2");
  const PrimeField& f = inst.field;
  FoldSoundnessReport rep;
  rep.trials = trials;
  rep.rho = dispersion_rho(D).rho;
  if (!column_check_passes(inst, Yp)) {
    rep.vacuous = true;
    return rep;
  }
  Distance mu = dist_to_pval_bruteforce(X, inst, Metric::hybrid(D, Pmf::uniform(X.dims)), opt);
  if (mu.infinite || mu.value == 0) {
    rep.vacuous = true;
    return rep;
  }
  rep.eps = mu.value;
  rep.row_eps = row_distances(X, D, Yp, inst, opt);

  const double log_k = std::log2(static_cast<double>(k));
  const size_t max_b = static_cast<size_t>(std::ceil(log_k - 1e-9));
  for (size_t b = 0; b <= max_b && !rep.row_selection_found; ++b) {
    Rational threshold = Rational(static_cast<unsigned long>(k)) * rep.eps /
                         (Rational(static_cast<unsigned long>(uint64_t{2} << b)) * rep.rho);
    std::vector<size_t> I;
    for (size_t i = 0; i < k; ++i) {
      if (rep.row_eps[i] >= Distance::of(threshold)) I.push_back(i);
    }
    if (static_cast<double>(I.size()) * 4.0 * log_k >= static_cast<double>(uint64_t{1} << b)) {
      rep.row_selection_found = true;
      rep.b = b;
      rep.I = I;
    }
  }

  const size_t classes = weight_classes(k, kappa);
  const int64_t a_raw = static_cast<int64_t>(max_b) - static_cast<int64_t>(rep.b);
  rep.a_star = static_cast<size_t>(std::clamp<int64_t>(a_raw, 1, static_cast<int64_t>(classes)));
  rep.support_bound = std::exp(-static_cast<double>(kappa) / (4.0 * log_k));
  rep.sound_bound = 1.0 / static_cast<double>(f.modulus() - 1) + rep.support_bound;

  // strict premise for the folding claim
  const Rational eps_sound = rep.eps * Rational(1023, 1024);
  const Metric metric = row_metric(D);
  PointSplit split = split_points(inst.J);
  const size_t cols = split.J2.size();
  for (uint64_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, t));
    if (rep.row_selection_found) {
      FoldingVector z = draw_folding_vector(rng, f, k, rep.a_star, class_weight(rep.a_star, kappa, k));
      bool hit = std::any_of(z.support.begin(), z.support.end(),
                             [&](size_t r) { return std::find(rep.I.begin(), rep.I.end(), r) != rep.I.end(); });
      rep.support_miss += !hit;
    }
    bool ok = false;
    for (size_t a = 1; a <= classes; ++a) {
      FoldLevel level{draw_folding_vector(rng, f, k, a, class_weight(a, kappa, k)), {}};
      if (ok) continue;
      InputTensor Xa = fold_rows(X, level);
      std::vector<Fe> va(cols, f.zero());
      for (size_t s = 0; s < level.z.support.size(); ++s) {
        for (size_t c = 0; c < cols; ++c) {
          va[c] = f.add(va[c], f.mul(level.z.values[s], Yp[level.z.support[s] * cols + c]));
        }
      }
      Distance d = dist_to_pval_bruteforce(Xa, PvalInstance{f, k, inst.m - 1, split.J2, va}, metric, opt);
      Rational need = eps_sound * Rational(static_cast<unsigned long>(uint64_t{1} << a)) / (4 * rep.rho);
      ok = d >= Distance::of(need);
    }
    rep.sound_fail += !ok;
  }
  double tr = static_cast<double>(std::max<uint64_t>(trials, 1));
  rep.holds = rep.row_selection_found && static_cast<double>(rep.support_miss) / tr <= three_sigma_bound(rep.support_bound, trials) &&
              static_cast<double>(rep.sound_fail) / tr <= three_sigma_bound(rep.sound_bound, trials);
  return rep;
}

size_t random_pval_claim_count(size_t n, size_t q, const Rational& eps) {
  double t = 2.0 * to_double(eps) * static_cast<double>(n) *
                 (std::log2(static_cast<double>(n)) + std::log2(static_cast<double>(q))) +
             4.0;
  return static_cast<size_t>(std::ceil(t - 1e-9));
}

MinDistanceReport check_random_pval_min_distance(const PrimeField& f, size_t k, size_t m, const Rational& eps,
                                                 uint64_t draws, uint64_t seed, const EnumerationOptions& opt) {
  MinDistanceReport rep;
  const size_t n = ipow(k, m);
  rep.t = random_pval_claim_count(n, f.modulus(), eps);
  rep.draws = draws;
  auto hits = run_trials<int>(
      draws, seed,
      [&](uint64_t s) {
        Rng rng(s);
        InputTensor W = InputTensor::cube(f, k, m);
        for (auto& x : W.data) x = f.of(rng.below(f.modulus()));
        PvalInstance inst{f, k, m, {}, {}};
        for (size_t i = 0; i < rep.t; ++i) {
          EvalPoint j(m);
          for (auto& c : j) c = f.of(rng.below(f.modulus()));
          inst.v.push_back(lde_eval(W, j));
          inst.J.push_back(std::move(j));
        }
        Distance d = pval_min_distance(inst, EnumerationOptions{opt.budget, Exec::Serial});
        return (!d.infinite && d.value < 2 * eps) ? 1 : 0;
      },
      opt.exec);
  for (int h : hits) rep.hits += static_cast<uint64_t>(h);
  rep.frequency = draws ? static_cast<double>(rep.hits) / static_cast<double>(draws) : 0.0;
  rep.sigma = std::sqrt(rep.bound * (1 - rep.bound) / static_cast<double>(std::max<uint64_t>(draws, 1)));
  rep.holds = rep.frequency <= rep.bound + 3 * rep.sigma;
  return rep;
}

namespace {

InputTensor random_bits(Rng& rng, size_t n) {
  InputTensor X(PrimeField(2), {n});
  for (auto& x : X.data) x = Fe{rng.below(2)};
  return X;
}

void note(ViolationReport& rep, bool ok, const std::string& what) {
  ++rep.checked;
  if (ok) return;
  if (rep.violations++ == 0) rep.first_violation = what;
}

}  // namespace

ViolationReport check_granular_counts(uint64_t trials, uint64_t seed) {
  ViolationReport rep;
  Rng rng(seed);
  for (uint64_t t = 0; t < trials; ++t) {
    size_t n = 1 + rng.below(12);
    Pmf p = random_pmf(rng, {n});
    GranularitySet B = granularise(p);
    bool ok = B.total() == 8 * n && B.counts.size() == n + 1;
    for (size_t i = 0; i < n && ok; ++i) {
      ok = ratio(B.counts[i], 8 * n) >= p[i] / 2;
    }
    note(rep, ok, "trial " + std::to_string(t) + " n=" + std::to_string(n));
  }
  return rep;
}

ViolationReport check_granular_distance(uint64_t trials, uint64_t seed) {
  ViolationReport rep;
  Rng rng(seed);
  for (uint64_t t = 0; t < trials; ++t) {
    size_t n = 1 + rng.below(12);
    Pmf p = random_pmf(rng, {n});
    InputTensor X = random_bits(rng, n), Y = random_bits(rng, n);
    Pmf Dg = granular_pmf(granularise(p));
    bool ok = dist(g_cat(X), g_cat(Y), Dg) >= dist(X, Y, p) / 2;
    note(rep, ok, "trial " + std::to_string(t) + " n=" + std::to_string(n));
  }
  return rep;
}

ViolationReport check_marginal_dispersion(uint64_t trials, uint64_t seed) {
  ViolationReport rep;
  Rng rng(seed);
  for (uint64_t t = 0; t < trials; ++t) {
    size_t k = 2 + rng.below(3), m = 2 + rng.below(3);
    Pmf D = random_pmf(rng, std::vector<size_t>(m, k));
    bool ok = dispersion_rho(marginal_first(D)).rho <= dispersion_rho(D).rho;
    note(rep, ok, "trial " + std::to_string(t) + " k=" + std::to_string(k) + " m=" + std::to_string(m));
  }
  return rep;
}

ViolationReport check_tv_shift(uint64_t trials, uint64_t seed) {
  ViolationReport rep;
  Rng rng(seed);
  for (uint64_t t = 0; t < trials; ++t) {
    size_t n = 1 + rng.below(12);
    Pmf D = random_pmf(rng, {n}), D2 = random_pmf(rng, {n});
    InputTensor X = random_bits(rng, n), Y = random_bits(rng, n);
    bool ok = dist(X, Y, D) <= tv_distance(D, D2) + dist(X, Y, D2);
    note(rep, ok, "trial " + std::to_string(t) + " n=" + std::to_string(n));
  }
  return rep;
}

}  // namespace dfipp
