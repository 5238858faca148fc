#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "dfipp/folding.hpp"
#include "dfipp/language.hpp"

namespace dfipp {

// Stand-in for the interactive reduction from an NC language to PVAL: it
// only promises uniform J and honest v = P_X(J), or whatever an adversarial
// strategy picks.
enum class ClaimMode { Honest, Adversarial };

using ClaimStrategy = std::function<PvalInstance(const InputTensor& X, Rng& rng)>;

struct ClaimGenerator {
  ClaimMode mode = ClaimMode::Honest;
  std::optional<size_t> t;  // defaults to honest_claim_count
  ClaimStrategy strategy;
};

// max(1, ceil(4 eps n log2 n))
size_t honest_claim_count(size_t n, const Rational& eps);

PvalInstance generate_pval_claims(const ClaimGenerator& gen, const InputTensor& X, const Rational& eps, Rng& rng);

// Adversarial strategy that always returns the given instance.
ClaimStrategy fixed_claims(PvalInstance inst);

// Tensor that a prover commits to for a claim instance.
enum class Commit { Input, ClosestUniform, ClosestHybrid };

struct DfNcParams {
  PvalInstance claims;
  Rational eps = Rational(1, 4);
  size_t r = 1;
  std::optional<size_t> kappa_override;
};

size_t df_nc_sample_count(const Rational& eps);  // ceil(3/eps)

// Draws T samples, sends (I, z) to the prover, then runs the uniform PVAL
// IPP on ((J, I), (v, z)).
Verdict df_ipp_nc_verifier(Session& s, const DfNcParams& p, FinIppTrace* trace = nullptr);

PvalInstance extend_claims(const PvalInstance& claims, const std::vector<size_t>& cells, const std::vector<Fe>& values);

class DfNcProver : public ProverStrategy {
 public:
  DfNcProver(const InputTensor& X, const DfNcParams& p, Commit commit, const EnumerationOptions& opt = {});
  Payload respond(const Transcript& t) override;

 private:
  InputTensor X_;
  DfNcParams p_;
  Commit commit_;
  EnumerationOptions opt_;
  std::optional<InputTensor> committed_;
  std::unique_ptr<FoldProver> inner_;
};

SessionResult run_df_ipp_nc(const InputTensor& X, const Pmf& D, const DfNcParams& p, ProverStrategy& prover,
                            uint64_t seed, FinIppTrace* trace = nullptr);

struct DispersedParams {
  PvalInstance claims;
  Rational eps = Rational(1, 4);
  Rational rho = 1;
  size_t r = 1;
  std::optional<size_t> kappa_override;
};

// r = max(1, min(m, floor(log(1/eps) / log k)))
size_t default_dispersed_rounds(size_t k, size_t m, const Rational& eps);

// fin_ipp against the true D, with leaf coordinates drawn from the sample
// oracle.
Verdict dispersed_ipp_nc_verifier(Session& s, const DispersedParams& p, FinIppTrace* trace = nullptr);

// The member a prover commits to; nullopt when PVAL is empty.
std::optional<InputTensor> committed_member(const InputTensor& X, const PvalInstance& inst, const Pmf* D,
                                            Commit commit, const EnumerationOptions& opt = {});

SessionResult run_dispersed_ipp_nc(const InputTensor& X, const Pmf& D, const DispersedParams& p,
                                   ProverStrategy& prover, uint64_t seed, FinIppTrace* trace = nullptr);

}  // namespace dfipp
