#pragma once

#include <json.hpp>

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dfipp/folding.hpp"
#include "dfipp/ham.hpp"
#include "dfipp/language.hpp"
#include "dfipp/product.hpp"

namespace dfipp {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode { kExitPass = 0, kExitStatistical = 1, kExitExact = 2, kExitBudget = 3 };

// Default enumeration budget, overridable through DFIPP_BUDGET.
uint64_t default_budget();

struct ExperimentConfig {
  nlohmann::json raw;
  std::string protocol;
  uint64_t field_modulus = 17;
  size_t k = 2, m = 4, r = 1;
  size_t n = 0;      // ham / symmetric length
  uint64_t w = 0;    // ham target weight
  size_t l = 3;      // Hadamard message bits
  size_t count = 4;  // echo values
  Rational eps = Rational(1, 4);
  std::optional<Rational> rho;
  std::optional<size_t> kappa_override;
  std::optional<unsigned> hash_bits_override;
  size_t repetitions = 1;
  size_t trials = 1;
  uint64_t seed = 1;
  std::string prover = "honest";
  std::string predicate = "even";
  std::string learner = "exact";
  nlohmann::json distribution = nlohmann::json{{"kind", "uniform"}};
  nlohmann::json input = nlohmann::json{{"kind", "member"}};
  std::optional<uint64_t> budget;
};

// Rejects unknown keys and malformed values with ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);

struct TrialRecord {
  uint64_t seed = 0;
  Verdict verdict;
  CostLedger ledger;
  std::vector<std::string> notes;
  size_t n = 0;
  Rational rho = 1;
};

struct RunRecord {
  ExperimentConfig cfg;
  std::vector<TrialRecord> trials;
  std::string transcript_jsonl;  // trial 0, repetition 0
};

RunRecord cmd_run(const ExperimentConfig& cfg, uint64_t budget, Exec exec = Exec::Parallel);
std::string run_csv(const RunRecord& rec);
nlohmann::json run_json(const RunRecord& rec);
std::string config_hash(const nlohmann::json& raw);

struct ReplayReport {
  bool match = false;
  std::optional<size_t> first_divergent;
  std::string detail;
  Verdict recorded;
  Verdict replayed;
  CostLedger recorded_ledger;
  CostLedger replayed_ledger;
  uint64_t recomputed_comm_bits = 0;
};

ReplayReport cmd_replay(const std::string& jsonl, uint64_t budget);

struct LemmaReport {
  std::string id;
  bool pass = false;
  bool statistical = false;
  nlohmann::json detail;
  int exit_code() const { return pass ? kExitPass : (statistical ? kExitStatistical : kExitExact); }
};

std::vector<std::string> lemma_ids();
// trials = 0 selects the lemma's default count.
LemmaReport cmd_check_lemma(const std::string& id, uint64_t trials, uint64_t seed, uint64_t budget);

nlohmann::json ham_lb_fixture_json(const HamLbFixture& fx);
nlohmann::json product_fixture_json(const ProductFixture& fx, size_t k, size_t m);

// Y with Hwt(Y) = w closest to X under D, flipping the cheapest cells.
InputTensor closest_weight_string(const InputTensor& X, const Pmf& D, uint64_t w);

}  // namespace dfipp
