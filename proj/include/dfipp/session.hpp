#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dfipp/distribution.hpp"
#include "dfipp/field.hpp"
#include "dfipp/rng.hpp"
#include "dfipp/tensor.hpp"

namespace dfipp {

enum class Role { Prover, Verifier };

struct Payload {
  std::vector<uint8_t> bytes;
  uint64_t bits = 0;

  friend bool operator==(const Payload& a, const Payload& b) { return a.bits == b.bits && a.bytes == b.bytes; }
};

class MalformedMessage : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fixed-width big-endian bit packing.
class PayloadWriter {
 public:
  void put(uint64_t value, unsigned width);
  void put_fe(const PrimeField& f, Fe x) { put(x.v, f.bits()); }
  void put_fes(const PrimeField& f, std::span<const Fe> xs) {
    for (Fe x : xs) put_fe(f, x);
  }
  Payload finish() { return std::move(p_); }

 private:
  Payload p_;
};

class PayloadReader {
 public:
  explicit PayloadReader(const Payload& p) : p_(&p) {}
  uint64_t get(unsigned width);
  Fe get_fe(const PrimeField& f);
  std::vector<Fe> get_fes(const PrimeField& f, size_t count);
  uint64_t remaining() const { return p_->bits - pos_; }
  void expect_end() const;

 private:
  const Payload* p_;
  uint64_t pos_ = 0;
};

// Width in bits needed to encode every value in [0, max_value].
unsigned width_for(uint64_t max_value);

struct Message {
  Role sender;
  Payload payload;
};

struct Transcript {
  std::vector<Message> messages;

  uint64_t comm_bits() const;
  size_t count(Role r) const;
};

struct CostLedger {
  uint64_t queries = 0;
  uint64_t samples = 0;
  uint64_t comm_bits = 0;
  uint64_t messages = 0;

  uint64_t rounds() const { return (messages + 1) / 2; }
  CostLedger& operator+=(const CostLedger& o);
  friend bool operator==(const CostLedger& a, const CostLedger& b) {
    return a.queries == b.queries && a.samples == b.samples && a.comm_bits == b.comm_bits &&
           a.messages == b.messages;
  }
};

struct Verdict {
  bool accepted = true;
  std::string reject_reason;

  static Verdict accept() { return Verdict{true, ""}; }
  static Verdict reject(std::string reason) { return Verdict{false, std::move(reason)}; }
  friend bool operator==(const Verdict& a, const Verdict& b) {
    return a.accepted == b.accepted && a.reject_reason == b.reject_reason;
  }
};

// A prover sees explicit inputs and X through its own constructor, and the
// verifier's messages through the transcript. It never sees oracles.
class ProverStrategy {
 public:
  virtual ~ProverStrategy() = default;
  virtual Payload respond(const Transcript& t) = 0;
};

// Replays recorded prover messages in order.
class ReplayProver : public ProverStrategy {
 public:
  explicit ReplayProver(std::vector<Payload> messages) : msgs_(std::move(messages)) {}
  Payload respond(const Transcript& t) override;

 private:
  std::vector<Payload> msgs_;
  size_t next_ = 0;
};

struct OracleHandles {
  const InputTensor* input = nullptr;
  const Pmf* distribution = nullptr;          // backs the sample oracle
  const SamplingCircuit* circuit = nullptr;   // white-box handle, visible to both parties
};

class Session {
 public:
  Session(ProverStrategy& prover, OracleHandles oracles, uint64_t seed);

  void send(Payload p);
  Payload receive();

  Fe query(size_t cell);
  struct Sample {
    size_t cell;
    Fe value;
  };
  Sample sample();

  Rng& coins() { return coins_; }
  const OracleHandles& oracles() const { return oracles_; }
  const CostLedger& ledger() const { return ledger_; }
  const Transcript& transcript() const { return transcript_; }

 private:
  ProverStrategy& prover_;
  OracleHandles oracles_;
  Rng coins_;
  std::optional<Sampler> sampler_;
  Rng sample_rng_;
  CostLedger ledger_;
  Transcript transcript_;
};

struct SessionResult {
  Verdict verdict;
  CostLedger ledger;
  Transcript transcript;
};

using VerifierProgram = std::function<Verdict(Session&)>;

// Drives the verifier to completion; malformed prover payloads reject.
SessionResult run_session(const VerifierProgram& verifier, ProverStrategy& prover, OracleHandles oracles,
                          uint64_t seed);

enum class AmplifyRule { AllAccept, Majority };

struct AmplifiedResult {
  Verdict verdict;
  CostLedger ledger;
  std::vector<Verdict> runs;
};

using SessionRunner = std::function<SessionResult(uint64_t seed)>;

AmplifiedResult amplify(const SessionRunner& run, size_t repetitions, AmplifyRule rule, uint64_t seed);

// Echo protocol used to test the harness: verifier sends values, prover
// returns them.
Verdict echo_verifier(Session& s, const PrimeField& f, size_t count);

class EchoProver : public ProverStrategy {
 public:
  EchoProver(const PrimeField& f, size_t count, bool wrong_arity = false)
      : f_(f), count_(count), wrong_arity_(wrong_arity) {}
  Payload respond(const Transcript& t) override;

 private:
  PrimeField f_;
  size_t count_;
  bool wrong_arity_;
};

// JSON-lines dump: a header object, then one object per message.
std::string transcript_to_jsonl(const Transcript& t, const std::string& header_json);
struct ParsedTranscript {
  std::string header_json;
  Transcript transcript;
  // index of the first message whose stored checksum does not match its
  // payload, if any
  std::optional<size_t> corrupt_index;
};
ParsedTranscript transcript_from_jsonl(const std::string& text);
uint64_t payload_checksum(const Payload& p);

}  // namespace dfipp
