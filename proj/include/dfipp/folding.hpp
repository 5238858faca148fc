#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dfipp/distribution.hpp"
#include "dfipp/rational.hpp"
#include "dfipp/session.hpp"
#include "dfipp/tensor.hpp"

namespace dfipp {

// max(1, ceil(8 log2(max(r,2)) log2 k))
size_t default_kappa(size_t k, size_t r);
// max(1, ceil(log2(K / kappa))) + 1 classes, a = 1..classes
size_t weight_classes(size_t K, size_t kappa);
// 2^a kappa clamped to [1, K]
size_t class_weight(size_t a, size_t kappa, size_t K);

struct FoldingVector {
  size_t a = 0;
  size_t K = 0;
  std::vector<size_t> support;  // increasing
  std::vector<Fe> values;       // uniform in F, so a value may be 0

  std::vector<Fe> dense(const PrimeField& f) const;
};

FoldingVector draw_folding_vector(Rng& rng, const PrimeField& f, size_t K, size_t a, size_t weight);

// One fold step. row_map[rho] is the row of the folded tensor feeding row rho
// of the (possibly extended) matrix, or -1 for the appended zero row. An
// empty map is the identity on k rows.
struct FoldLevel {
  FoldingVector z;
  std::vector<int64_t> row_map;
};

// sum_rho z[rho] * X[row_map(rho), .]
InputTensor fold_rows(const InputTensor& X, const FoldLevel& level);

// J split into first coordinates and the distinct tails J2.
struct PointSplit {
  std::vector<EvalPoint> J2;
  std::vector<size_t> column_of;
};
PointSplit split_points(const std::vector<EvalPoint>& J);

struct FoldOutput {
  size_t a = 0;
  FoldingVector z;
  std::vector<EvalPoint> J2;
  std::vector<Fe> v;
  size_t tau = 0;  // source queries per folded coordinate
};

struct FoldTuple {
  std::vector<FoldLevel> path;
  std::vector<EvalPoint> J;
  std::vector<Fe> v;
};

struct FoldConfig {
  PrimeField field;
  size_t k = 0;      // rows of the folded tensor
  size_t K = 0;      // rows after extension (k when not extended)
  std::vector<int64_t> row_map;
  size_t kappa = 1;
  size_t classes = 1;
};

std::vector<int64_t> granular_row_map(const GranularitySet& B);

// One parallel folding phase: receives Y' for every tuple, checks each
// column against v, then sends folding vectors. On success the tuples are
// replaced by their children (tuple-major, class-minor order).
Verdict fold_phase_verifier(Session& s, const FoldConfig& cfg, std::vector<FoldTuple>& tuples,
                            std::vector<FoldOutput>* outputs = nullptr);
// Same, reading Y' from the rest of an already received message.
Verdict fold_phase_verifier(Session& s, const FoldConfig& cfg, std::vector<FoldTuple>& tuples, PayloadReader& r,
                            std::vector<FoldOutput>* outputs = nullptr);

// Number of source queries for one coordinate of the folded tensor at the
// end of the path; zero-row contributions are free.
uint64_t path_locality(const std::vector<FoldLevel>& path);
// Queries the true folded coordinate `tail` of X through the session.
Fe evaluate_folded(Session& s, size_t k, size_t m, const std::vector<FoldLevel>& path, size_t tail);

enum class LeafSource { Uniform, SampleOracle, Circuit };

struct FinIppParams {
  PvalInstance inst;
  Rational eps = Rational(1, 4);
  Rational rho = 1;
  size_t r = 1;
  std::optional<size_t> kappa_override;
  LeafSource leaf_source = LeafSource::Uniform;
};

struct LeafRecord {
  std::vector<size_t> classes;
  Rational eps_r;
  uint64_t checks = 0;  // coordinates per source (uniform and distribution)
  uint64_t tau = 0;
};

struct FinIppTrace {
  size_t kappa = 0;
  size_t classes = 0;
  std::vector<std::string> notes;  // clamps and unmet asymptotic constraints
  std::vector<LeafRecord> leaves;
  uint64_t queries_before_leaf_phase = 0;
  std::vector<FoldOutput> first_phase;

  // sum over leaves of 2 * checks * tau
  uint64_t expected_leaf_queries() const;
};

Verdict fin_ipp_verifier(Session& s, const FinIppParams& p, FinIppTrace* trace = nullptr);

struct LeafPhaseConfig {
  PrimeField field;
  size_t k = 0;
  size_t m = 0;
  size_t r = 0;
  Rational eps;
  Rational level_divisor;  // eps_r = eps * prod_s 2^{a_s} / level_divisor
  LeafSource source = LeafSource::Uniform;
  // circuit source; defaults to the session's white-box handle
  const SamplingCircuit* circuit = nullptr;
};

// Receives every leaf tensor, checks it against (J_r, v_r), then spot-checks
// it against the true fold of X.
Verdict leaf_phase_verifier(Session& s, const LeafPhaseConfig& cfg, const std::vector<FoldTuple>& leaves,
                            FinIppTrace& trace);

// Plays the folding protocols honestly for a committed tensor. Committing to
// the input gives the honest prover; committing to another member of the
// language gives the fixed-alternative prover.
class FoldProver : public ProverStrategy {
 public:
  // Plain folding: r phases with identity row maps.
  FoldProver(const InputTensor& committed, const PvalInstance& inst, size_t r, size_t kappa);
  Payload respond(const Transcript& t) override;

 protected:
  struct Tuple {
    InputTensor X;
    std::vector<EvalPoint> J;
    std::vector<Fe> v;
    std::vector<Fe> Y;  // k x |J2| sent this phase
    PointSplit split;
  };
  Payload send_rows();
  void write_rows(PayloadWriter& w);
  Payload send_leaves();
  void absorb_vectors(const Payload& p, const std::vector<int64_t>& row_map, size_t K);

  PrimeField f_;
  size_t k_;
  size_t r_;
  size_t kappa_;
  size_t phase_ = 0;
  bool awaiting_vectors_ = false;
  std::vector<Tuple> tuples_;
};

// Sends uniformly random field elements with the honest message layout.
class RandomLieProver : public ProverStrategy {
 public:
  RandomLieProver(ProverStrategy& shape_source, const PrimeField& f, uint64_t seed)
      : inner_(shape_source), f_(f), rng_(seed) {}
  Payload respond(const Transcript& t) override;

 private:
  ProverStrategy& inner_;
  PrimeField f_;
  Rng rng_;
};

SessionResult run_fin_ipp(const InputTensor& X, const Pmf* D, const FinIppParams& p, ProverStrategy& prover,
                          uint64_t seed, FinIppTrace* trace = nullptr);

// Standalone single-tuple fold: receive Y', check, emit fold outputs.
std::optional<std::vector<FoldOutput>> poly_fold(Session& s, const PvalInstance& inst, size_t kappa);

}  // namespace dfipp
