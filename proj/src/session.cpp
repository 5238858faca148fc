#include "dfipp/session.hpp"

#include <json.hpp>
#include <sstream>

namespace dfipp {

void PayloadWriter::put(uint64_t value, unsigned width) {
  if (width < 64 && (value >> width) != 0) throw std::invalid_argument("value does not fit the field width");
  for (unsigned b = width; b-- > 0;) {
    if (p_.bits % 8 == 0) p_.bytes.push_back(0);
    if ((value >> b) & 1) p_.bytes.back() |= static_cast<uint8_t>(0x80u >> (p_.bits % 8));
    ++p_.bits;
  }
}

uint64_t PayloadReader::get(unsigned width) {
  if (remaining() < width) throw MalformedMessage("payload shorter than expected");
  uint64_t v = 0;
  for (unsigned b = 0; b < width; ++b) {
    uint8_t byte = p_->bytes[pos_ / 8];
    v = (v << 1) | ((byte >> (7 - pos_ % 8)) & 1u);
    ++pos_;
  }
  return v;
}

Fe PayloadReader::get_fe(const PrimeField& f) {
  uint64_t v = get(f.bits());
  if (v >= f.modulus()) throw MalformedMessage("field element out of range");
  return Fe{v};
}

std::vector<Fe> PayloadReader::get_fes(const PrimeField& f, size_t count) {
  std::vector<Fe> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) out.push_back(get_fe(f));
  return out;
}

void PayloadReader::expect_end() const {
  if (remaining() != 0) throw MalformedMessage("payload longer than expected");
}

unsigned width_for(uint64_t max_value) {
  unsigned w = 1;
  while (w < 64 && (max_value >> w) != 0) ++w;
  return w;
}

uint64_t Transcript::comm_bits() const {
  uint64_t s = 0;
  for (const auto& m : messages) s += m.payload.bits;
  return s;
}

size_t Transcript::count(Role r) const {
  size_t c = 0;
  for (const auto& m : messages) c += (m.sender == r);
  return c;
}

CostLedger& CostLedger::operator+=(const CostLedger& o) {
  queries += o.queries;
  samples += o.samples;
  comm_bits += o.comm_bits;
  messages += o.messages;
  return *this;
}

Payload ReplayProver::respond(const Transcript&) {
  if (next_ >= msgs_.size()) throw MalformedMessage("recorded transcript has no further prover message");
  return msgs_[next_++];
}

Session::Session(ProverStrategy& prover, OracleHandles oracles, uint64_t seed)
    : prover_(prover), oracles_(oracles), coins_(derive_seed(seed, 0)), sample_rng_(derive_seed(seed, 1)) {
  if (oracles_.distribution) sampler_.emplace(*oracles_.distribution);
}

void Session::send(Payload p) {
  ledger_.comm_bits += p.bits;
  ++ledger_.messages;
  transcript_.messages.push_back(Message{Role::Verifier, std::move(p)});
}

Payload Session::receive() {
  Payload p = prover_.respond(transcript_);
  ledger_.comm_bits += p.bits;
  ++ledger_.messages;
  transcript_.messages.push_back(Message{Role::Prover, p});
  return p;
}

Fe Session::query(size_t cell) {
  if (!oracles_.input) throw std::logic_error("no input oracle attached");
  if (cell >= oracles_.input->size()) throw std::out_of_range("query outside the input");
  ++ledger_.queries;
  return oracles_.input->data[cell];
}

Session::Sample Session::sample() {
  if (!sampler_ || !oracles_.input) throw std::logic_error("no sample oracle attached");
  ++ledger_.samples;
  size_t cell = sampler_->draw(sample_rng_);
  return Sample{cell, oracles_.input->data[cell]};
}

SessionResult run_session(const VerifierProgram& verifier, ProverStrategy& prover, OracleHandles oracles,
                          uint64_t seed) {
  Session s(prover, oracles, seed);
  Verdict v;
  try {
    v = verifier(s);
  } catch (const MalformedMessage&) {
    v = Verdict::reject("malformed");
  }
  return SessionResult{v, s.ledger(), s.transcript()};
}

AmplifiedResult amplify(const SessionRunner& run, size_t repetitions, AmplifyRule rule, uint64_t seed) {
  if (repetitions == 0) throw std::invalid_argument("repetitions must be positive");
  AmplifiedResult out;
  size_t accepts = 0;
  std::string first_reason;
  for (size_t r = 0; r < repetitions; ++r) {
    SessionResult res = run(derive_seed(seed, 1000 + r));
    out.ledger += res.ledger;
    if (res.verdict.accepted) {
      ++accepts;
    } else if (first_reason.empty()) {
      first_reason = res.verdict.reject_reason;
    }
    out.runs.push_back(res.verdict);
  }
  bool ok = rule == AmplifyRule::AllAccept ? accepts == repetitions : 2 * accepts > repetitions;
  out.verdict = ok ? Verdict::accept() : Verdict::reject(first_reason.empty() ? "majority" : first_reason);
  return out;
}

Verdict echo_verifier(Session& s, const PrimeField& f, size_t count) {
  std::vector<Fe> xs;
  PayloadWriter w;
  for (size_t i = 0; i < count; ++i) {
    xs.push_back(f.of(s.coins().below(f.modulus())));
    w.put_fe(f, xs.back());
  }
  s.send(w.finish());
  Payload back = s.receive();
  PayloadReader r(back);
  auto ys = r.get_fes(f, count);
  r.expect_end();
  return ys == xs ? Verdict::accept() : Verdict::reject("echo");
}

Payload EchoProver::respond(const Transcript& t) {
  const Payload& last = t.messages.back().payload;
  if (!wrong_arity_) return last;
  PayloadReader r(last);
  PayloadWriter w;
  for (size_t i = 0; i + 1 < count_; ++i) w.put_fe(f_, r.get_fe(f_));
  return w.finish();
}

uint64_t payload_checksum(const Payload& p) {
  uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&](uint8_t b) {
    h ^= b;
    h *= 0x100000001b3ull;
  };
  for (int i = 0; i < 8; ++i) mix(static_cast<uint8_t>(p.bits >> (8 * i)));
  for (uint8_t b : p.bytes) mix(b);
  return h;
}

namespace {

std::string to_hex(const std::vector<uint8_t>& bytes) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (uint8_t b : bytes) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 15]);
  }
  return s;
}

std::vector<uint8_t> from_hex(const std::string& s) {
  if (s.size() % 2) throw std::invalid_argument("odd hex length");
  auto nib = [](char c) -> uint8_t {
    if (c >= '0' && c <= '9') return static_cast<uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<uint8_t>(c - 'a' + 10);
    throw std::invalid_argument("bad hex digit");
  };
  std::vector<uint8_t> out;
  for (size_t i = 0; i < s.size(); i += 2) out.push_back(static_cast<uint8_t>(nib(s[i]) << 4 | nib(s[i + 1])));
  return out;
}

}  // namespace

std::string transcript_to_jsonl(const Transcript& t, const std::string& header_json) {
  using nlohmann::json;
  std::ostringstream os;
  json h = json::parse(header_json);
  h["type"] = "header";
  os << h.dump() << "\n";
  for (size_t i = 0; i < t.messages.size(); ++i) {
    const auto& m = t.messages[i];
    json j;
    j["type"] = "message";
    j["index"] = i;
    j["sender"] = m.sender == Role::Prover ? "P" : "V";
    j["bits"] = m.payload.bits;
    j["hex"] = to_hex(m.payload.bytes);
    j["checksum"] = std::to_string(payload_checksum(m.payload));
    os << j.dump() << "\n";
  }
  return os.str();
}

ParsedTranscript transcript_from_jsonl(const std::string& text) {
  using nlohmann::json;
  ParsedTranscript out;
  std::istringstream is(text);
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    if (j.at("type") == "header") {
      j.erase("type");
      out.header_json = j.dump();
      have_header = true;
      continue;
    }
    Message m;
    m.sender = j.at("sender") == "P" ? Role::Prover : Role::Verifier;
    m.payload.bits = j.at("bits").get<uint64_t>();
    m.payload.bytes = from_hex(j.at("hex").get<std::string>());
    if (m.payload.bytes.size() != (m.payload.bits + 7) / 8) throw std::invalid_argument("payload length mismatch");
    size_t idx = out.transcript.messages.size();
    if (!out.corrupt_index && j.at("checksum").get<std::string>() != std::to_string(payload_checksum(m.payload))) {
      out.corrupt_index = idx;
    }
    out.transcript.messages.push_back(std::move(m));
  }
  if (!have_header) throw std::invalid_argument("transcript has no header line");
  return out;
}

}  // namespace dfipp
