#include "dfipp/nc.hpp"

#include <cmath>

namespace dfipp {

size_t honest_claim_count(size_t n, const Rational& eps) {
  double t = 4.0 * to_double(eps) * static_cast<double>(n) * std::log2(static_cast<double>(std::max<size_t>(n, 1)));
  return std::max<size_t>(1, static_cast<size_t>(std::ceil(t - 1e-9)));
}

PvalInstance generate_pval_claims(const ClaimGenerator& gen, const InputTensor& X, const Rational& eps, Rng& rng) {
  if (gen.mode == ClaimMode::Adversarial) {
    if (!gen.strategy) throw std::invalid_argument("adversarial generator without a strategy");
    return gen.strategy(X, rng);
  }
  if (!X.is_cube()) throw std::invalid_argument("claims need a cube tensor");
  const PrimeField& f = X.field;
  PvalInstance inst{f, X.side(), X.order(), {}, {}};
  size_t t = gen.t ? *gen.t : honest_claim_count(X.size(), eps);
  for (size_t i = 0; i < t; ++i) {
    EvalPoint j(inst.m);
    for (auto& c : j) c = f.of(rng.below(f.modulus()));
    inst.v.push_back(lde_eval(X, j));
    inst.J.push_back(std::move(j));
  }
  return inst;
}

ClaimStrategy fixed_claims(PvalInstance inst) {
  return [inst = std::move(inst)](const InputTensor&, Rng&) { return inst; };
}

size_t df_nc_sample_count(const Rational& eps) { return ceil_u64(3 / eps); }

PvalInstance extend_claims(const PvalInstance& claims, const std::vector<size_t>& cells, const std::vector<Fe>& values) {
  PvalInstance ext = claims;
  for (size_t i = 0; i < cells.size(); ++i) {
    std::vector<size_t> coords(claims.m);
    size_t c = cells[i];
    for (size_t d = claims.m; d-- > 0;) {
      coords[d] = c % claims.k;
      c /= claims.k;
    }
    ext.J.push_back(embed_cell(claims.field, coords));
    ext.v.push_back(values[i]);
  }
  return ext;
}

Verdict df_ipp_nc_verifier(Session& s, const DfNcParams& p, FinIppTrace* trace) {
  const PrimeField& f = p.claims.field;
  const size_t n = p.claims.n();
  const size_t T = df_nc_sample_count(p.eps);
  std::vector<size_t> cells;
  std::vector<Fe> values;
  PayloadWriter w;
  for (size_t i = 0; i < T; ++i) {
    auto smp = s.sample();
    cells.push_back(smp.cell);
    values.push_back(smp.value);
    w.put(smp.cell, width_for(n - 1));
    w.put_fe(f, smp.value);
  }
  s.send(w.finish());
  FinIppParams fp{extend_claims(p.claims, cells, values), p.eps, 1, p.r, p.kappa_override, LeafSource::Uniform};
  return fin_ipp_verifier(s, fp, trace);
}

std::optional<InputTensor> committed_member(const InputTensor& X, const PvalInstance& inst, const Pmf* D,
                                            Commit commit, const EnumerationOptions& opt) {
  switch (commit) {
    case Commit::Input:
      return X;
    case Commit::ClosestUniform:
      return closest_pval_member(X, inst, Metric::uniform(X.dims), opt).witness;
    case Commit::ClosestHybrid:
      if (!D) throw std::invalid_argument("hybrid commitment needs the distribution");
      return closest_pval_member(X, inst, Metric::hybrid(*D, Pmf::uniform(X.dims)), opt).witness;
  }
  return std::nullopt;
}

DfNcProver::DfNcProver(const InputTensor& X, const DfNcParams& p, Commit commit, const EnumerationOptions& opt)
    : X_(X), p_(p), commit_(commit), opt_(opt) {}

Payload DfNcProver::respond(const Transcript& t) {
  if (!inner_) {
    const PrimeField& f = p_.claims.field;
    PayloadReader r(t.messages.back().payload);
    std::vector<size_t> cells;
    std::vector<Fe> values;
    while (r.remaining() > 0) {
      cells.push_back(r.get(width_for(p_.claims.n() - 1)));
      values.push_back(r.get_fe(f));
    }
    PvalInstance ext = extend_claims(p_.claims, cells, values);
    // the sampled constraints are only known now, so the alternative is
    // recomputed against the extended instance; the inner IPP is uniform, so
    // a hybrid commitment collapses to the uniform one
    auto member = committed_member(X_, ext, nullptr, commit_ == Commit::ClosestHybrid ? Commit::ClosestUniform : commit_, opt_);
    committed_ = member ? *member : X_;
    size_t kappa = p_.kappa_override ? *p_.kappa_override : default_kappa(ext.k, p_.r);
    inner_ = std::make_unique<FoldProver>(*committed_, ext, p_.r, kappa);
  }
  return inner_->respond(t);
}

SessionResult run_df_ipp_nc(const InputTensor& X, const Pmf& D, const DfNcParams& p, ProverStrategy& prover,
                            uint64_t seed, FinIppTrace* trace) {
  OracleHandles h{&X, &D, nullptr};
  return run_session([&](Session& s) { return df_ipp_nc_verifier(s, p, trace); }, prover, h, seed);
}

size_t default_dispersed_rounds(size_t k, size_t m, const Rational& eps) {
  if (k < 2) return 1;
  double r = std::floor(std::log(1.0 / to_double(eps)) / std::log(static_cast<double>(k)) + 1e-9);
  return std::max<size_t>(1, std::min<size_t>(m, static_cast<size_t>(std::max(0.0, r))));
}

Verdict dispersed_ipp_nc_verifier(Session& s, const DispersedParams& p, FinIppTrace* trace) {
  FinIppParams fp{p.claims, p.eps, p.rho, p.r, p.kappa_override, LeafSource::SampleOracle};
  return fin_ipp_verifier(s, fp, trace);
}

SessionResult run_dispersed_ipp_nc(const InputTensor& X, const Pmf& D, const DispersedParams& p,
                                   ProverStrategy& prover, uint64_t seed, FinIppTrace* trace) {
  OracleHandles h{&X, &D, nullptr};
  return run_session([&](Session& s) { return dispersed_ipp_nc_verifier(s, p, trace); }, prover, h, seed);
}

}  // namespace dfipp
