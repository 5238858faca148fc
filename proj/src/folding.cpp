#include "dfipp/folding.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace dfipp {

size_t default_kappa(size_t k, size_t r) {
  double v = 8.0 * std::log2(static_cast<double>(std::max<size_t>(r, 2))) * std::log2(static_cast<double>(k));
  return std::max<size_t>(1, static_cast<size_t>(std::ceil(v - 1e-9)));
}

size_t weight_classes(size_t K, size_t kappa) {
  // smallest c with 2^c * kappa >= K
  size_t c = 0;
  while ((size_t{1} << c) * kappa < K) ++c;
  return std::max<size_t>(1, c) + 1;
}

size_t class_weight(size_t a, size_t kappa, size_t K) {
  if (a >= 63) return K;
  unsigned __int128 w = static_cast<unsigned __int128>(uint64_t{1} << a) * kappa;
  if (w > K) return K;
  return std::max<size_t>(1, static_cast<size_t>(w));
}

std::vector<Fe> FoldingVector::dense(const PrimeField& f) const {
  std::vector<Fe> z(K, f.zero());
  for (size_t i = 0; i < support.size(); ++i) z[support[i]] = values[i];
  return z;
}

FoldingVector draw_folding_vector(Rng& rng, const PrimeField& f, size_t K, size_t a, size_t weight) {
  if (weight > K) throw std::invalid_argument("weight exceeds length");
  std::vector<size_t> idx(K);
  for (size_t i = 0; i < K; ++i) idx[i] = i;
  for (size_t i = 0; i < weight; ++i) std::swap(idx[i], idx[i + rng.below(K - i)]);
  FoldingVector z;
  z.a = a;
  z.K = K;
  z.support.assign(idx.begin(), idx.begin() + static_cast<long>(weight));
  std::sort(z.support.begin(), z.support.end());
  for (size_t i = 0; i < weight; ++i) z.values.push_back(f.of(rng.below(f.modulus())));
  return z;
}

namespace {

int64_t source_row(const FoldLevel& level, size_t rho) {
  return level.row_map.empty() ? static_cast<int64_t>(rho) : level.row_map[rho];
}

}  // namespace

InputTensor fold_rows(const InputTensor& X, const FoldLevel& level) {
  const PrimeField& f = X.field;
  InputTensor out(f, X.row_dims());
  size_t w = X.row_size();
  for (size_t i = 0; i < level.z.support.size(); ++i) {
    int64_t src = source_row(level, level.z.support[i]);
    if (src < 0) continue;
    Fe c = level.z.values[i];
    for (size_t j = 0; j < w; ++j) {
      out.data[j] = f.add(out.data[j], f.mul(c, X.data[static_cast<size_t>(src) * w + j]));
    }
  }
  return out;
}

PointSplit split_points(const std::vector<EvalPoint>& J) {
  PointSplit s;
  std::map<std::vector<uint64_t>, size_t> seen;
  for (const auto& j : J) {
    if (j.empty()) throw std::invalid_argument("cannot split a zero-dimensional point");
    EvalPoint tail(j.begin() + 1, j.end());
    std::vector<uint64_t> key;
    for (Fe x : tail) key.push_back(x.v);
    auto [it, fresh] = seen.emplace(key, s.J2.size());
    if (fresh) s.J2.push_back(tail);
    s.column_of.push_back(it->second);
  }
  return s;
}

std::vector<int64_t> granular_row_map(const GranularitySet& B) {
  auto rows = extension_rows(B);
  const int64_t zero_row = static_cast<int64_t>(B.counts.size()) - 1;
  std::vector<int64_t> map;
  map.reserve(rows.size());
  for (size_t r : rows) map.push_back(static_cast<int64_t>(r) == zero_row ? -1 : static_cast<int64_t>(r));
  return map;
}

namespace {

void write_vector(PayloadWriter& w, const PrimeField& f, const FoldingVector& z) {
  unsigned width = width_for(z.K == 0 ? 0 : z.K - 1);
  for (size_t i : z.support) w.put(i, width);
  for (Fe x : z.values) w.put_fe(f, x);
}

FoldingVector read_vector(PayloadReader& r, const PrimeField& f, size_t K, size_t a, size_t weight) {
  FoldingVector z;
  z.a = a;
  z.K = K;
  unsigned width = width_for(K == 0 ? 0 : K - 1);
  for (size_t i = 0; i < weight; ++i) {
    uint64_t pos = r.get(width);
    if (pos >= K || (!z.support.empty() && pos <= z.support.back())) throw MalformedMessage("bad folding support");
    z.support.push_back(pos);
  }
  z.values = r.get_fes(f, weight);
  return z;
}

// z . U where U row rho is Y row row_map(rho), zero for the appended row
std::vector<Fe> fold_columns(const PrimeField& f, const FoldLevel& level, const std::vector<Fe>& Y, size_t cols) {
  std::vector<Fe> out(cols, f.zero());
  for (size_t i = 0; i < level.z.support.size(); ++i) {
    int64_t src = source_row(level, level.z.support[i]);
    if (src < 0) continue;
    for (size_t c = 0; c < cols; ++c) {
      out[c] = f.add(out[c], f.mul(level.z.values[i], Y[static_cast<size_t>(src) * cols + c]));
    }
  }
  return out;
}

size_t live_support(const FoldLevel& level) {
  size_t n = 0;
  for (size_t rho : level.z.support) n += source_row(level, rho) >= 0;
  return n;
}

}  // namespace

Verdict fold_phase_verifier(Session& s, const FoldConfig& cfg, std::vector<FoldTuple>& tuples,
                            std::vector<FoldOutput>* outputs) {
  Payload msg = s.receive();
  PayloadReader r(msg);
  return fold_phase_verifier(s, cfg, tuples, r, outputs);
}

Verdict fold_phase_verifier(Session& s, const FoldConfig& cfg, std::vector<FoldTuple>& tuples, PayloadReader& r,
                            std::vector<FoldOutput>* outputs) {
  const PrimeField& f = cfg.field;
  std::vector<PointSplit> splits;
  std::vector<std::vector<Fe>> Ys;
  for (const auto& t : tuples) {
    splits.push_back(split_points(t.J));
    Ys.push_back(r.get_fes(f, cfg.k * splits.back().J2.size()));
  }
  r.expect_end();

  LagrangeBasis basis(f, cfg.k);
  for (size_t ti = 0; ti < tuples.size(); ++ti) {
    const auto& t = tuples[ti];
    size_t cols = splits[ti].J2.size();
    std::vector<Fe> column(cfg.k);
    for (size_t p = 0; p < t.J.size(); ++p) {
      size_t c = splits[ti].column_of[p];
      for (size_t i = 0; i < cfg.k; ++i) column[i] = Ys[ti][i * cols + c];
      if (basis.eval(column, t.J[p][0]) != t.v[p]) return Verdict::reject("fold-consistency");
    }
  }

  PayloadWriter w;
  std::vector<FoldTuple> children;
  for (size_t ti = 0; ti < tuples.size(); ++ti) {
    size_t cols = splits[ti].J2.size();
    for (size_t a = 1; a <= cfg.classes; ++a) {
      FoldLevel level{draw_folding_vector(s.coins(), f, cfg.K, a, class_weight(a, cfg.kappa, cfg.K)), cfg.row_map};
      write_vector(w, f, level.z);
      FoldTuple child;
      child.path = tuples[ti].path;
      child.path.push_back(level);
      child.J = splits[ti].J2;
      child.v = fold_columns(f, level, Ys[ti], cols);
      if (outputs) outputs->push_back(FoldOutput{a, level.z, child.J, child.v, live_support(level)});
      children.push_back(std::move(child));
    }
  }
  s.send(w.finish());
  tuples.swap(children);
  return Verdict::accept();
}

uint64_t path_locality(const std::vector<FoldLevel>& path) {
  uint64_t t = 1;
  for (const auto& level : path) t *= live_support(level);
  return t;
}

Fe evaluate_folded(Session& s, size_t k, size_t m, const std::vector<FoldLevel>& path, size_t tail) {
  const PrimeField& f = s.oracles().input->field;
  size_t rest = ipow(k, m - path.size());
  std::vector<std::pair<size_t, Fe>> combos{{0, f.one()}};
  for (const auto& level : path) {
    std::vector<std::pair<size_t, Fe>> next;
    for (const auto& [idx, coeff] : combos) {
      for (size_t i = 0; i < level.z.support.size(); ++i) {
        int64_t src = source_row(level, level.z.support[i]);
        if (src < 0) continue;
        next.emplace_back(idx * k + static_cast<size_t>(src), f.mul(coeff, level.z.values[i]));
      }
    }
    combos.swap(next);
  }
  Fe acc = f.zero();
  for (const auto& [idx, coeff] : combos) acc = f.add(acc, f.mul(coeff, s.query(idx * rest + tail)));
  return acc;
}

uint64_t FinIppTrace::expected_leaf_queries() const {
  uint64_t q = 0;
  for (const auto& l : leaves) q += 2 * l.checks * l.tau;
  return q;
}

namespace {

size_t draw_leaf_coordinate(Session& s, LeafSource src, size_t rest, const SamplingCircuit* circuit) {
  switch (src) {
    case LeafSource::Uniform:
      return s.coins().below(rest);
    case LeafSource::SampleOracle:
      return s.sample().cell % rest;
    case LeafSource::Circuit: {
      const SamplingCircuit* c = circuit ? circuit : s.oracles().circuit;
      if (!c) throw std::logic_error("no circuit handle attached");
      return c->sample(s.coins()) % rest;
    }
  }
  return 0;
}

}  // namespace

Verdict fin_ipp_verifier(Session& s, const FinIppParams& p, FinIppTrace* trace) {
  const PvalInstance& inst = p.inst;
  inst.validate();
  const PrimeField& f = inst.field;
  const size_t k = inst.k, m = inst.m;
  if (p.r > m) throw std::invalid_argument("r exceeds the number of dimensions");
  if (p.eps <= 0 || p.rho < 1) throw std::invalid_argument("need eps > 0 and rho >= 1");
  FinIppTrace local;
  FinIppTrace& tr = trace ? *trace : local;
  tr.kappa = p.kappa_override ? *p.kappa_override : default_kappa(k, p.r);
  tr.classes = weight_classes(k, tr.kappa);
  if (p.kappa_override) tr.notes.push_back("kappa overridden to " + std::to_string(tr.kappa));
  for (size_t a = 1; a <= tr.classes; ++a) {
    if ((size_t{1} << a) * tr.kappa > k) {
      tr.notes.push_back("weight of class " + std::to_string(a) + " clamped to k=" + std::to_string(k));
    }
  }
  if (Rational(static_cast<unsigned long>(ipow(k, p.r))) > 1 / p.eps) tr.notes.push_back("k^r > 1/eps");
  if (10 * p.r > f.modulus()) tr.notes.push_back("10r > |F|");
  if (Rational(static_cast<unsigned long>(f.modulus())) > 1 / p.eps) tr.notes.push_back("|F| > 1/eps");

  std::vector<FoldTuple> tuples{FoldTuple{{}, inst.J, inst.v}};
  FoldConfig cfg{f, k, k, {}, tr.kappa, tr.classes};
  for (size_t phase = 0; phase < p.r; ++phase) {
    Verdict v = fold_phase_verifier(s, cfg, tuples, phase == 0 ? &tr.first_phase : nullptr);
    if (!v.accepted) return v;
  }
  tr.queries_before_leaf_phase = s.ledger().queries;

  LeafPhaseConfig lc{f, k, m, p.r, p.eps, 4 * p.rho, p.leaf_source, nullptr};
  return leaf_phase_verifier(s, lc, tuples, tr);
}

Verdict leaf_phase_verifier(Session& s, const LeafPhaseConfig& cfg, const std::vector<FoldTuple>& leaves,
                            FinIppTrace& tr) {
  const PrimeField& f = cfg.field;
  const size_t k = cfg.k, m = cfg.m;
  const size_t rest = ipow(k, m - cfg.r);
  Payload msg = s.receive();
  PayloadReader r(msg);
  std::vector<InputTensor> X_r;
  for (size_t i = 0; i < leaves.size(); ++i) {
    X_r.emplace_back(f, std::vector<size_t>(m - cfg.r, k), r.get_fes(f, rest));
  }
  r.expect_end();

  for (size_t i = 0; i < leaves.size(); ++i) {
    const auto& t = leaves[i];
    for (size_t q = 0; q < t.J.size(); ++q) {
      if (lde_eval(X_r[i], t.J[q]) != t.v[q]) return Verdict::reject("leaf-pval");
    }
    LeafRecord rec;
    rec.eps_r = cfg.eps;
    for (const auto& level : t.path) {
      rec.classes.push_back(level.z.a);
      rec.eps_r *= Rational(static_cast<unsigned long>(uint64_t{1} << level.z.a)) / cfg.level_divisor;
    }
    rec.checks = ceil_u64(10 / rec.eps_r);
    rec.tau = path_locality(t.path);
    tr.leaves.push_back(rec);
    for (LeafSource src : {LeafSource::Uniform, cfg.source}) {
      for (uint64_t c = 0; c < rec.checks; ++c) {
        size_t j = draw_leaf_coordinate(s, src, rest, cfg.circuit);
        if (evaluate_folded(s, k, m, t.path, j) != X_r[i].data[j]) return Verdict::reject("leaf-sample");
      }
    }
  }
  return Verdict::accept();
}

FoldProver::FoldProver(const InputTensor& committed, const PvalInstance& inst, size_t r, size_t kappa)
    : f_(inst.field), k_(inst.k), r_(r), kappa_(kappa) {
  tuples_.push_back(Tuple{committed, inst.J, inst.v, {}, {}});
}

Payload FoldProver::send_rows() {
  PayloadWriter w;
  write_rows(w);
  return w.finish();
}

void FoldProver::write_rows(PayloadWriter& w) {
  for (auto& t : tuples_) {
    t.split = split_points(t.J);
    size_t cols = t.split.J2.size();
    t.Y.assign(k_ * cols, f_.zero());
    for (size_t i = 0; i < k_; ++i) {
      InputTensor row = t.X.row(i);
      for (size_t c = 0; c < cols; ++c) t.Y[i * cols + c] = lde_eval(row, t.split.J2[c]);
    }
    w.put_fes(f_, t.Y);
  }
}

Payload FoldProver::send_leaves() {
  PayloadWriter w;
  for (const auto& t : tuples_) w.put_fes(f_, t.X.data);
  return w.finish();
}

void FoldProver::absorb_vectors(const Payload& p, const std::vector<int64_t>& row_map, size_t K) {
  PayloadReader r(p);
  size_t classes = weight_classes(K, kappa_);
  std::vector<Tuple> next;
  for (const auto& t : tuples_) {
    size_t cols = t.split.J2.size();
    for (size_t a = 1; a <= classes; ++a) {
      FoldLevel level{read_vector(r, f_, K, a, class_weight(a, kappa_, K)), row_map};
      next.push_back(Tuple{fold_rows(t.X, level), t.split.J2, fold_columns(f_, level, t.Y, cols), {}, {}});
    }
  }
  tuples_.swap(next);
}

Payload FoldProver::respond(const Transcript& t) {
  if (awaiting_vectors_) {
    absorb_vectors(t.messages.back().payload, {}, k_);
    awaiting_vectors_ = false;
    ++phase_;
  }
  if (phase_ < r_) {
    awaiting_vectors_ = true;
    return send_rows();
  }
  return send_leaves();
}

Payload RandomLieProver::respond(const Transcript& t) {
  Payload shape = inner_.respond(t);
  PayloadWriter w;
  for (uint64_t i = 0; i < shape.bits / f_.bits(); ++i) w.put_fe(f_, f_.of(rng_.below(f_.modulus())));
  return w.finish();
}

SessionResult run_fin_ipp(const InputTensor& X, const Pmf* D, const FinIppParams& p, ProverStrategy& prover,
                          uint64_t seed, FinIppTrace* trace) {
  OracleHandles h{&X, D, nullptr};
  return run_session([&](Session& s) { return fin_ipp_verifier(s, p, trace); }, prover, h, seed);
}

std::optional<std::vector<FoldOutput>> poly_fold(Session& s, const PvalInstance& inst, size_t kappa) {
  std::vector<FoldTuple> tuples{FoldTuple{{}, inst.J, inst.v}};
  FoldConfig cfg{inst.field, inst.k, inst.k, {}, kappa, weight_classes(inst.k, kappa)};
  std::vector<FoldOutput> outs;
  Verdict v = fold_phase_verifier(s, cfg, tuples, &outs);
  if (!v.accepted) return std::nullopt;
  return outs;
}

}  // namespace dfipp
