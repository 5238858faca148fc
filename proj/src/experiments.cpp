#include "dfipp/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "dfipp/lemmas.hpp"
#include "dfipp/nc.hpp"
#include "dfipp/rlcc.hpp"

namespace dfipp {

using nlohmann::json;

uint64_t default_budget() {
  if (const char* env = std::getenv("DFIPP_BUDGET")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return kDefaultEnumerationBudget;
}

namespace {

const std::set<std::string> kProtocols = {"echo",   "ham",    "symmetric", "fin_ipp",  "df_ipp_nc",
                                          "dispersed_ipp_nc", "rlcc", "whitebox", "learnable"};
const std::set<std::string> kTopKeys = {"protocol", "field_modulus", "k",     "m",          "r",
                                        "n",        "w",             "eps",   "rho",        "kappa_override",
                                        "repetitions", "trials",     "seed",  "prover",     "distribution",
                                        "input",    "budget",        "hash_bits_override", "l", "count",
                                        "predicate", "learner"};
const std::set<std::string> kDistKeys = {"kind", "cell", "masses", "weights", "zeros", "profile",
                                         "inputs", "gates", "outputs"};
const std::set<std::string> kInputKeys = {"kind", "values", "weight", "corrupt", "t", "J", "v", "message"};
const std::set<std::string> kProverModes = {"honest", "fixed-alternative", "random-lie", "random-split", "bad-sum",
                                            "wrong-arity"};

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError("unknown key in " + where + ": " + it.key());
  }
}

Rational json_rational(const json& v, const std::string& key) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<long>());
  throw ConfigError(key + ": expected a rational such as \"1/4\"");
}

SymmetricPredicate make_predicate(const std::string& name) {
  if (name == "even") return [](uint64_t w) { return w % 2 == 0; };
  if (name == "odd") return [](uint64_t w) { return w % 2 == 1; };
  auto eq = name.find('=');
  if (eq != std::string::npos) {
    std::string head = name.substr(0, eq);
    uint64_t v = std::stoull(name.substr(eq + 1));
    if (head == "weight") return [v](uint64_t w) { return w == v; };
    if (head == "at-least") return [v](uint64_t w) { return w >= v; };
    if (head == "at-most") return [v](uint64_t w) { return w <= v; };
  }
  throw ConfigError("unknown predicate: " + name);
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  check_keys(j, kTopKeys, "config");
  ExperimentConfig c;
  c.raw = j;
  try {
    if (!j.contains("protocol")) throw ConfigError("config needs a protocol");
    c.protocol = j.at("protocol").get<std::string>();
    if (!kProtocols.count(c.protocol)) throw ConfigError("unknown protocol: " + c.protocol);
    if (c.protocol == "rlcc" || c.protocol == "learnable") c.field_modulus = 2;
    if (j.contains("field_modulus")) c.field_modulus = j["field_modulus"].get<uint64_t>();
    if (j.contains("k")) c.k = j["k"].get<size_t>();
    if (j.contains("m")) c.m = j["m"].get<size_t>();
    if (j.contains("r")) c.r = j["r"].get<size_t>();
    if (j.contains("n")) c.n = j["n"].get<size_t>();
    if (j.contains("w")) c.w = j["w"].get<uint64_t>();
    if (j.contains("l")) c.l = j["l"].get<size_t>();
    if (j.contains("count")) c.count = j["count"].get<size_t>();
    if (j.contains("eps")) c.eps = json_rational(j["eps"], "eps");
    if (j.contains("rho")) c.rho = json_rational(j["rho"], "rho");
    if (j.contains("kappa_override")) c.kappa_override = j["kappa_override"].get<size_t>();
    if (j.contains("hash_bits_override")) c.hash_bits_override = j["hash_bits_override"].get<unsigned>();
    if (j.contains("repetitions")) c.repetitions = j["repetitions"].get<size_t>();
    if (j.contains("trials")) c.trials = j["trials"].get<size_t>();
    if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
    if (j.contains("budget")) c.budget = j["budget"].get<uint64_t>();
    if (j.contains("predicate")) c.predicate = j["predicate"].get<std::string>();
    if (j.contains("learner")) c.learner = j["learner"].get<std::string>();
    if (j.contains("prover")) {
      const json& p = j["prover"];
      if (p.is_string()) {
        c.prover = p.get<std::string>();
      } else {
        check_keys(p, {"mode"}, "prover");
        c.prover = p.value("mode", "honest");
      }
    }
    if (j.contains("distribution")) {
      c.distribution = j["distribution"];
      check_keys(c.distribution, kDistKeys, "distribution");
    }
    if (j.contains("input")) {
      c.input = j["input"];
      check_keys(c.input, kInputKeys, "input");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!is_prime_u64(c.field_modulus)) throw ConfigError("field_modulus must be prime");
  if (c.k < 2 || c.m < 1) throw ConfigError("need k >= 2 and m >= 1");
  if (c.r < 1) throw ConfigError("need r >= 1");
  if (c.eps <= 0 || c.eps > 1) throw ConfigError("eps must lie in (0, 1]");
  if (c.rho && *c.rho < 1) throw ConfigError("rho must be at least 1");
  if (c.trials < 1 || c.repetitions < 1) throw ConfigError("trials and repetitions must be positive");
  if (!kProverModes.count(c.prover)) throw ConfigError("unknown prover mode: " + c.prover);
  if (c.learner != "exact" && c.learner != "abort") throw ConfigError("learner must be exact or abort");
  if ((c.protocol == "ham" || c.protocol == "symmetric") && c.n == 0) throw ConfigError(c.protocol + " needs n");
  if (c.protocol == "ham" && c.w > c.n) throw ConfigError("w exceeds n");
  if ((c.protocol == "rlcc" || c.protocol == "learnable") && (c.l < 1 || c.l > 16)) throw ConfigError("l must be 1..16");
  if (c.protocol == "symmetric") make_predicate(c.predicate);
  const std::string input_kind = c.input.value("kind", "member");
  if (!std::set<std::string>{"member", "random", "explicit", "corrupt"}.count(input_kind)) {
    throw ConfigError("unknown input kind: " + input_kind);
  }
  return c;
}

namespace {

SamplingCircuit parse_circuit(const json& d) {
  size_t inputs = d.at("inputs").get<size_t>();
  std::vector<Gate> gates;
  for (const auto& g : d.at("gates")) {
    std::string op = g.at(0).get<std::string>();
    size_t a = g.at(1).get<size_t>();
    if (op == "not") {
      gates.push_back(Gate{GateOp::Not, a, 0});
    } else if (op == "and" || op == "xor") {
      gates.push_back(Gate{op == "and" ? GateOp::And : GateOp::Xor, a, g.at(2).get<size_t>()});
    } else {
      throw ConfigError("unknown gate: " + op);
    }
  }
  return SamplingCircuit(inputs, std::move(gates), d.at("outputs").get<std::vector<size_t>>());
}

Pmf build_pmf(const json& d, const std::vector<size_t>& dims, Rng& rng, uint64_t seed) {
  const std::string kind = d.value("kind", "uniform");
  if (kind == "uniform") return Pmf::uniform(dims);
  if (kind == "point") return Pmf::point(dims, d.at("cell").get<size_t>());
  if (kind == "random") return random_pmf(rng, dims, d.value("zeros", false));
  if (kind == "explicit") {
    if (d.contains("weights")) return Pmf::from_weights(dims, d["weights"].get<std::vector<uint64_t>>());
    std::vector<Rational> masses;
    for (const auto& x : d.at("masses")) masses.push_back(json_rational(x, "masses"));
    return Pmf(dims, masses);
  }
  if (kind == "product") {
    if (dims.empty()) throw ConfigError("product distribution needs a cube");
    auto fx = gen_product_fixture(dims[0], dims.size(), parse_profile(d.value("profile", "uniform")), seed);
    return fx.D.joint();
  }
  if (kind == "circuit") return circuit_pmf(parse_circuit(d), dims);
  throw ConfigError("unknown distribution kind: " + kind);
}

InputTensor random_tensor(const PrimeField& f, std::vector<size_t> dims, Rng& rng) {
  InputTensor X(f, std::move(dims));
  for (auto& x : X.data) x = f.of(rng.below(f.modulus()));
  return X;
}

InputTensor explicit_tensor(const PrimeField& f, std::vector<size_t> dims, const json& in) {
  InputTensor X(f, std::move(dims));
  auto vals = in.at("values").get<std::vector<uint64_t>>();
  if (vals.size() != X.size()) throw ConfigError("input values have the wrong length");
  for (size_t i = 0; i < vals.size(); ++i) {
    if (vals[i] >= f.modulus()) throw ConfigError("input value outside the field");
    X.data[i] = Fe{vals[i]};
  }
  return X;
}

InputTensor weight_string(size_t n, uint64_t w, Rng& rng) {
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (size_t i = 0; i < w; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
  InputTensor X(PrimeField(2), {n});
  for (size_t i = 0; i < w; ++i) X.data[idx[i]] = Fe{1};
  return X;
}

class OwnedLieProver : public ProverStrategy {
 public:
  OwnedLieProver(std::unique_ptr<ProverStrategy> inner, const PrimeField& f, uint64_t seed)
      : inner_(std::move(inner)), lie_(*inner_, f, seed) {}
  Payload respond(const Transcript& t) override { return lie_.respond(t); }

 private:
  std::unique_ptr<ProverStrategy> inner_;
  RandomLieProver lie_;
};

using ProverFactory = std::function<std::unique_ptr<ProverStrategy>(uint64_t seed)>;

struct TrialSetup {
  std::optional<InputTensor> X;
  std::optional<Pmf> D;
  std::optional<SamplingCircuit> C;
  VerifierProgram verifier;
  ProverFactory make_prover;
  FinIppTrace fin;
  WhiteboxTrace wb;
  size_t n = 0;
  Rational rho = 1;

  OracleHandles handles() const {
    return OracleHandles{X ? &*X : nullptr, D ? &*D : nullptr, C ? &*C : nullptr};
  }
  void reset_traces() {
    fin = FinIppTrace{};
    wb = WhiteboxTrace{};
  }
  std::vector<std::string> notes() const {
    std::vector<std::string> out = fin.notes;
    out.insert(out.end(), wb.fold.notes.begin(), wb.fold.notes.end());
    return out;
  }
};

struct PvalInput {
  InputTensor X;
  PvalInstance inst;
};

PvalInput build_pval_input(const ExperimentConfig& c, const PrimeField& f, Rng& rng) {
  const json& in = c.input;
  const std::string kind = in.value("kind", "member");
  const size_t n = ipow(c.k, c.m);
  std::vector<size_t> dims(c.m, c.k);
  size_t t = in.contains("t") ? in["t"].get<size_t>() : honest_claim_count(n, c.eps);
  ClaimGenerator gen{ClaimMode::Honest, t, {}};
  if (kind == "member") {
    InputTensor X = random_tensor(f, dims, rng);
    PvalInstance inst = generate_pval_claims(gen, X, c.eps, rng);
    return {std::move(X), std::move(inst)};
  }
  if (kind == "random") {
    InputTensor X = random_tensor(f, dims, rng);
    InputTensor W = random_tensor(f, dims, rng);
    PvalInstance inst = generate_pval_claims(gen, W, c.eps, rng);
    return {std::move(X), std::move(inst)};
  }
  if (kind == "explicit") {
    InputTensor X = explicit_tensor(f, dims, in);
    if (!in.contains("J")) return {X, generate_pval_claims(gen, X, c.eps, rng)};
    PvalInstance inst{f, c.k, c.m, {}, {}};
    for (const auto& pt : in["J"]) {
      EvalPoint j;
      for (const auto& x : pt) j.push_back(f.of(x.get<uint64_t>()));
      inst.J.push_back(std::move(j));
    }
    for (const auto& x : in.at("v")) inst.v.push_back(f.of(x.get<uint64_t>()));
    try {
      inst.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("claims: ") + e.what());
    }
    return {std::move(X), std::move(inst)};
  }
  throw ConfigError("input kind " + kind + " does not apply to " + c.protocol);
}

InputTensor committed_or_input(const InputTensor& X, const PvalInstance& inst, const Pmf& D, const std::string& mode,
                               const EnumerationOptions& opt) {
  if (mode != "fixed-alternative") return X;
  auto w = committed_member(X, inst, &D, Commit::ClosestHybrid, opt);
  return w ? *w : X;
}

std::unique_ptr<TrialSetup> build_trial(const ExperimentConfig& c, uint64_t trial_seed, uint64_t budget) {
  auto st = std::make_unique<TrialSetup>();
  TrialSetup* S = st.get();
  Rng rng(derive_seed(trial_seed, 7));
  const EnumerationOptions opt{budget, Exec::Serial};
  const PrimeField f(c.field_modulus);
  const std::string& mode = c.prover;
  const std::string input_kind = c.input.value("kind", "member");

  if (c.protocol == "echo") {
    S->n = c.count;
    size_t count = c.count;
    S->verifier = [f, count](Session& s) { return echo_verifier(s, f, count); };
    bool wrong = mode == "wrong-arity";
    S->make_prover = [f, count, wrong](uint64_t) { return std::make_unique<EchoProver>(f, count, wrong); };
    return st;
  }

  if (c.protocol == "ham" || c.protocol == "symmetric") {
    const size_t n = c.n;
    S->n = n;
    S->D = build_pmf(c.distribution, {n}, rng, derive_seed(trial_seed, 11));
    SymmetricPredicate pred = c.protocol == "symmetric" ? make_predicate(c.predicate) : SymmetricPredicate{};
    if (input_kind == "member") {
      uint64_t w = c.w;
      if (c.protocol == "symmetric") {
        // uniformly random weight satisfying the predicate
        std::vector<uint64_t> ok;
        for (uint64_t x = 0; x <= n; ++x) {
          if (pred(x)) ok.push_back(x);
        }
        if (ok.empty()) throw ConfigError("predicate accepts no weight");
        w = ok[rng.below(ok.size())];
      }
      S->X = weight_string(n, w, rng);
    } else if (input_kind == "random") {
      S->X = random_tensor(PrimeField(2), {n}, rng);
    } else if (input_kind == "explicit") {
      S->X = explicit_tensor(PrimeField(2), {n}, c.input);
    } else {
      throw ConfigError("input kind " + input_kind + " does not apply to " + c.protocol);
    }
    const Rational eps = c.eps;
    // weight and string the prover commits to
    uint64_t hw = hamming_weight(*S->X);
    uint64_t claim_w = c.protocol == "ham" ? c.w : hw;
    if (c.protocol == "symmetric" && !pred(hw)) {
      Distance best = Distance::inf();
      for (uint64_t x = 0; x <= n; ++x) {
        if (!pred(x)) continue;
        Distance d = distance_to_hamming_slice(*S->X, *S->D, x);
        if (d < best) {
          best = d;
          claim_w = x;
        }
      }
    }
    InputTensor committed = *S->X;
    if (mode == "fixed-alternative" || (c.protocol == "symmetric" && claim_w != hw)) {
      committed = closest_weight_string(*S->X, *S->D, claim_w);
    }
    HamSplit split;
    if (mode == "random-split") {
      split = nullptr;
    } else if (mode == "bad-sum") {
      split = ham_bad_sum_split();
    } else {
      split = ham_counting_split(committed);
    }
    if (c.protocol == "ham") {
      HamParams hp{n, c.w, eps, 2};
      S->verifier = [hp](Session& s) { return ham_verifier(s, hp); };
      S->make_prover = [n, claim_w, split](uint64_t seed) {
        return std::make_unique<HamProver>(n, claim_w, split ? split : ham_random_split(seed));
      };
    } else {
      S->verifier = [n, pred, eps](Session& s) { return symmetric_verifier(s, n, pred, eps); };
      S->make_prover = [n, claim_w, split](uint64_t seed) {
        return std::make_unique<SymmetricProver>(n, claim_w, split ? split : ham_random_split(seed));
      };
    }
    return st;
  }

  if (c.protocol == "rlcc" || c.protocol == "learnable") {
    const size_t l = c.l;
    const size_t n = size_t{1} << l;
    S->n = n;
    S->D = build_pmf(c.distribution, {n}, rng, derive_seed(trial_seed, 11));
    uint64_t msg = c.input.contains("message") ? c.input["message"].get<uint64_t>() : rng.below(n);
    if (input_kind == "member" || input_kind == "corrupt") {
      S->X = hadamard_codeword(msg % n, l);
      if (input_kind == "corrupt") {
        for (const auto& i : c.input.at("corrupt")) {
          size_t cell = i.get<size_t>();
          if (cell >= n) throw ConfigError("corrupt position out of range");
          S->X->data[cell].v ^= 1;
        }
      }
    } else if (input_kind == "random") {
      S->X = random_tensor(PrimeField(2), {n}, rng);
    } else {
      S->X = explicit_tensor(PrimeField(2), {n}, c.input);
    }
    const Rational eps = c.eps;
    uint64_t decoded = hadamard_decode(*S->X, *S->D, l);
    if (c.protocol == "rlcc") {
      CorrectorHandle corr = hadamard_corrector();
      S->verifier = [l, eps, corr](Session& s) {
        VerifierProgram uni = [l, eps](Session& ss) { return hadamard_uniform_ipp(ss, l, nullptr, eps); };
        return rlcc_verifier(s, uni, corr, eps);
      };
      S->make_prover = [decoded, l](uint64_t) { return std::make_unique<HadamardProver>(decoded, l); };
    } else {
      ExplicitLanguage L{PrimeField(2), n, {}};
      for (uint64_t a = 0; a < n; ++a) L.members.push_back(hadamard_codeword(a, l));
      Learner learner = c.learner == "exact" ? exact_learner(*S->D) : aborting_learner();
      VirtualUniformIpp ipp = witness_uniform_ipp(L);
      S->verifier = [learner, ipp, eps](Session& s) { return learnable_verifier(s, learner, ipp, eps); };
      InputTensor Y = closest_member(L, *S->X, *S->D);
      S->make_prover = [Y](uint64_t) { return std::make_unique<MemberProver>(Y); };
    }
    return st;
  }

  // PVAL-based protocols over [k]^m
  std::vector<size_t> dims(c.m, c.k);
  S->n = ipow(c.k, c.m);
  if (c.r > c.m) throw ConfigError("r exceeds m");

  if (c.protocol == "whitebox") {
    if (std::popcount(c.k) != 1) throw ConfigError("whitebox needs k a power of two");
    const std::string dkind = c.distribution.value("kind", "product");
    if (dkind == "circuit") {
      S->C = parse_circuit(c.distribution);
    } else if (dkind == "product" || dkind == "uniform") {
      std::string profile = dkind == "uniform" ? "uniform" : c.distribution.value("profile", "uniform");
      S->C = gen_product_fixture(c.k, c.m, parse_profile(profile), derive_seed(trial_seed, 11)).C;
    } else {
      throw ConfigError("whitebox needs a product or circuit distribution");
    }
    Pmf joint = circuit_pmf(*S->C, dims);
    S->rho = dispersion_rho(joint).rho;
    PvalInput pin = build_pval_input(c, f, rng);
    S->X = pin.X;
    WhiteboxParams wp{pin.inst, c.eps, c.r, c.kappa_override, Rational(1, 1000), std::nullopt, c.hash_bits_override};
    S->verifier = [S, wp](Session& s) { return whitebox_verifier(s, wp, &S->wb); };
    InputTensor committed = committed_or_input(pin.X, pin.inst, joint, mode, opt);
    SamplingCircuit C = *S->C;
    S->make_prover = [committed, C, wp, mode, f](uint64_t seed) -> std::unique_ptr<ProverStrategy> {
      auto p = std::make_unique<WhiteboxProver>(committed, C, wp);
      if (mode == "random-lie") return std::make_unique<OwnedLieProver>(std::move(p), f, seed);
      return p;
    };
    return st;
  }

  S->D = build_pmf(c.distribution, dims, rng, derive_seed(trial_seed, 11));
  PvalInput pin = build_pval_input(c, f, rng);
  S->X = pin.X;
  const bool uniform_d = c.distribution.value("kind", "uniform") == "uniform";
  const size_t kappa = c.kappa_override ? *c.kappa_override : default_kappa(c.k, c.r);

  if (c.protocol == "df_ipp_nc") {
    DfNcParams dp{pin.inst, c.eps, c.r, c.kappa_override};
    S->verifier = [S, dp](Session& s) { return df_ipp_nc_verifier(s, dp, &S->fin); };
    Commit commit = mode == "fixed-alternative" ? Commit::ClosestUniform : Commit::Input;
    InputTensor X = pin.X;
    S->make_prover = [X, dp, commit, opt, mode, f](uint64_t seed) -> std::unique_ptr<ProverStrategy> {
      auto p = std::make_unique<DfNcProver>(X, dp, commit, opt);
      if (mode == "random-lie") return std::make_unique<OwnedLieProver>(std::move(p), f, seed);
      return p;
    };
    return st;
  }

  FinIppParams fp{pin.inst, c.eps, 1, c.r, c.kappa_override, LeafSource::Uniform};
  if (c.protocol == "dispersed_ipp_nc" || !uniform_d) {
    fp.leaf_source = LeafSource::SampleOracle;
    fp.rho = c.rho ? *c.rho : dispersion_rho(*S->D).rho;
  } else if (c.rho) {
    fp.rho = *c.rho;
  }
  S->rho = fp.rho;
  if (c.protocol == "dispersed_ipp_nc") {
    DispersedParams dp{pin.inst, c.eps, fp.rho, c.r, c.kappa_override};
    S->verifier = [S, dp](Session& s) { return dispersed_ipp_nc_verifier(s, dp, &S->fin); };
  } else {
    S->verifier = [S, fp](Session& s) { return fin_ipp_verifier(s, fp, &S->fin); };
  }
  InputTensor committed = committed_or_input(pin.X, pin.inst, *S->D, mode, opt);
  PvalInstance inst = pin.inst;
  size_t r = c.r;
  S->make_prover = [committed, inst, r, kappa, mode, f](uint64_t seed) -> std::unique_ptr<ProverStrategy> {
    auto p = std::make_unique<FoldProver>(committed, inst, r, kappa);
    if (mode == "random-lie") return std::make_unique<OwnedLieProver>(std::move(p), f, seed);
    return p;
  };
  return st;
}

json verdict_json(const Verdict& v) { return json{{"accepted", v.accepted}, {"reject_reason", v.reject_reason}}; }

json ledger_json(const CostLedger& l) {
  return json{{"queries", l.queries}, {"samples", l.samples}, {"comm_bits", l.comm_bits}, {"messages", l.messages}};
}

Verdict verdict_from_json(const json& j) { return Verdict{j.at("accepted").get<bool>(), j.at("reject_reason").get<std::string>()}; }

CostLedger ledger_from_json(const json& j) {
  return CostLedger{j.at("queries").get<uint64_t>(), j.at("samples").get<uint64_t>(),
                    j.at("comm_bits").get<uint64_t>(), j.at("messages").get<uint64_t>()};
}

uint64_t session_seed(uint64_t trial_seed, size_t rep) { return derive_seed(trial_seed, 1000 + rep); }

TrialRecord run_trial(const ExperimentConfig& c, uint64_t trial_seed, uint64_t budget, std::string* transcript) {
  auto st = build_trial(c, trial_seed, budget);
  TrialRecord rec;
  rec.seed = trial_seed;
  rec.n = st->n;
  rec.rho = st->rho;
  std::set<std::string> notes;
  for (size_t rep = 0; rep < c.repetitions; ++rep) {
    const uint64_t ss = session_seed(trial_seed, rep);
    st->reset_traces();
    auto prover = st->make_prover(derive_seed(ss, 9));
    SessionResult res = run_session(st->verifier, *prover, st->handles(), ss);
    rec.ledger += res.ledger;
    for (auto& note : st->notes()) notes.insert(note);
    if (!res.verdict.accepted && rec.verdict.accepted) rec.verdict = res.verdict;
    if (rep == 0 && transcript) {
      json h{{"config", c.raw},        {"trial_seed", trial_seed},   {"session_seed", ss},
             {"repetition", 0},        {"budget", budget},           {"verdict", verdict_json(res.verdict)},
             {"ledger", ledger_json(res.ledger)}};
      *transcript = transcript_to_jsonl(res.transcript, h.dump());
    }
    // all-accept amplification stops at the first rejection
    if (!rec.verdict.accepted) break;
  }
  rec.notes.assign(notes.begin(), notes.end());
  return rec;
}

}  // namespace

InputTensor closest_weight_string(const InputTensor& X, const Pmf& D, uint64_t w) {
  uint64_t ones = hamming_weight(X);
  InputTensor Y = X;
  if (ones == w) return Y;
  const uint64_t from = ones > w ? 1 : 0;
  std::vector<size_t> cand;
  for (size_t i = 0; i < X.size(); ++i) {
    if (X.data[i].v == from) cand.push_back(i);
  }
  std::stable_sort(cand.begin(), cand.end(), [&](size_t a, size_t b) { return D[a] < D[b]; });
  uint64_t need = ones > w ? ones - w : w - ones;
  if (need > cand.size()) throw std::invalid_argument("weight out of range");
  for (uint64_t i = 0; i < need; ++i) Y.data[cand[i]].v = 1 - from;
  return Y;
}

RunRecord cmd_run(const ExperimentConfig& cfg, uint64_t budget, Exec exec) {
  RunRecord rec;
  rec.cfg = cfg;
  rec.trials = run_trials<TrialRecord>(
      cfg.trials, cfg.seed, [&](uint64_t ts) { return run_trial(cfg, ts, budget, nullptr); }, exec);
  run_trial(cfg, derive_seed(cfg.seed, 0), budget, &rec.transcript_jsonl);
  return rec;
}

std::string run_csv(const RunRecord& rec) {
  std::ostringstream os;
  os << "protocol,n,k,m,r,eps,rho,field,queries,samples,comm_bits,messages,accepted,reject_reason,seed\n";
  const auto& c = rec.cfg;
  for (const auto& t : rec.trials) {
    os << c.protocol << ',' << t.n << ',' << c.k << ',' << c.m << ',' << c.r << ',' << to_string(c.eps) << ','
       << to_string(t.rho) << ',' << c.field_modulus << ',' << t.ledger.queries << ',' << t.ledger.samples << ','
       << t.ledger.comm_bits << ',' << t.ledger.messages << ',' << (t.verdict.accepted ? 1 : 0) << ','
       << t.verdict.reject_reason << ',' << t.seed << '\n';
  }
  return os.str();
}

std::string config_hash(const json& raw) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : raw.dump()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

json run_json(const RunRecord& rec) {
  json out;
  out["config_hash"] = config_hash(rec.cfg.raw);
  out["protocol"] = rec.cfg.protocol;
  out["seed"] = rec.cfg.seed;
  out["trials"] = rec.trials.size();
  out["repetitions"] = rec.cfg.repetitions;
  uint64_t acc = 0;
  std::map<std::string, uint64_t> reasons;
  std::set<std::string> notes;
  for (const auto& t : rec.trials) {
    if (t.verdict.accepted) {
      ++acc;
    } else {
      ++reasons[t.verdict.reject_reason];
    }
    notes.insert(t.notes.begin(), t.notes.end());
  }
  out["accepted"] = acc;
  out["rejected"] = rec.trials.size() - acc;
  out["reject_reasons"] = reasons;
  auto stat = [&](auto get) {
    uint64_t lo = UINT64_MAX, hi = 0;
    double sum = 0;
    for (const auto& t : rec.trials) {
      uint64_t v = get(t.ledger);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += static_cast<double>(v);
    }
    if (rec.trials.empty()) lo = 0;
    return json{{"min", lo}, {"mean", rec.trials.empty() ? 0.0 : sum / static_cast<double>(rec.trials.size())}, {"max", hi}};
  };
  out["queries"] = stat([](const CostLedger& l) { return l.queries; });
  out["samples"] = stat([](const CostLedger& l) { return l.samples; });
  out["comm_bits"] = stat([](const CostLedger& l) { return l.comm_bits; });
  out["messages"] = stat([](const CostLedger& l) { return l.messages; });
  out["notes"] = std::vector<std::string>(notes.begin(), notes.end());
  return out;
}

ReplayReport cmd_replay(const std::string& jsonl, uint64_t budget) {
  ReplayReport rep;
  ParsedTranscript parsed = transcript_from_jsonl(jsonl);
  json h = json::parse(parsed.header_json);
  ExperimentConfig c = parse_config(h.at("config"));
  rep.recorded = verdict_from_json(h.at("verdict"));
  rep.recorded_ledger = ledger_from_json(h.at("ledger"));
  rep.recomputed_comm_bits = parsed.transcript.comm_bits();
  if (parsed.corrupt_index) {
    rep.first_divergent = parsed.corrupt_index;
    rep.detail = "checksum mismatch at message " + std::to_string(*parsed.corrupt_index);
    return rep;
  }
  if (h.contains("budget")) budget = h["budget"].get<uint64_t>();
  auto st = build_trial(c, h.at("trial_seed").get<uint64_t>(), budget);
  std::vector<Payload> prover_msgs;
  for (const auto& m : parsed.transcript.messages) {
    if (m.sender == Role::Prover) prover_msgs.push_back(m.payload);
  }
  ReplayProver rp(std::move(prover_msgs));
  SessionResult res = run_session(st->verifier, rp, st->handles(), h.at("session_seed").get<uint64_t>());
  rep.replayed = res.verdict;
  rep.replayed_ledger = res.ledger;
  const auto& a = parsed.transcript.messages;
  const auto& b = res.transcript.messages;
  for (size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
    if (i >= a.size() || i >= b.size() || a[i].sender != b[i].sender || !(a[i].payload == b[i].payload)) {
      rep.first_divergent = i;
      rep.detail = "message " + std::to_string(i) + " differs";
      break;
    }
  }
  if (!rep.first_divergent && !(rep.recorded == rep.replayed)) rep.detail = "verdict differs";
  if (!rep.first_divergent && rep.detail.empty() && !(rep.recorded_ledger == rep.replayed_ledger)) {
    rep.detail = "ledger differs";
  }
  if (!rep.first_divergent && rep.detail.empty() && rep.recomputed_comm_bits != rep.recorded_ledger.comm_bits) {
    rep.detail = "communication total differs";
  }
  rep.match = rep.detail.empty();
  return rep;
}

// ---- lemma checks ---------------------------------------------------------

namespace {

json violation_json(const ViolationReport& v) {
  return json{{"checked", v.checked}, {"violations", v.violations}, {"first_violation", v.first_violation}};
}

LemmaReport exact_report(const std::string& id, const ViolationReport& v) {
  LemmaReport r{id, v.holds() && v.checked > 0, false, violation_json(v)};
  return r;
}

double three_sigma(double p, uint64_t n) {
  return p + 3.0 * std::sqrt(p * (1 - p) / static_cast<double>(std::max<uint64_t>(n, 1)));
}

LemmaReport run_fold_preservation(uint64_t trials, uint64_t seed, const EnumerationOptions& opt) {
  const PrimeField f(5);
  // 0 vacuous, 1 holds, 2 violated
  auto res = run_trials<int>(trials, seed, [&](uint64_t s) {
    Rng rng(s);
    bool uniform = rng.below(4) == 0;
    auto pi = random_preservation_instance(rng, f, 2, 2, uniform);
    auto rep = check_distance_preservation(pi.X, pi.D, pi.Yp, pi.inst, opt);
    if (rep.vacuous) return 0;
    return rep.holds ? 1 : 2;
  });
  uint64_t nonvac = 0, bad = 0;
  for (int r : res) {
    nonvac += r != 0;
    bad += r == 2;
  }
  LemmaReport out{"fold-preservation", bad == 0 && nonvac > 0, false, {}};
  out.detail = json{{"instances", trials}, {"non_vacuous", nonvac}, {"violations", bad}};
  return out;
}

LemmaReport run_product_preservation(uint64_t trials, uint64_t seed, const EnumerationOptions& opt) {
  const PrimeField f(5);
  const Rational tau(1, 1000);
  struct Out {
    int code = 0;  // 0 vacuous, 1 holds, 2 violated
    int cross = 0;  // uniform first factor: 1 holds, 2 violated
  };
  auto res = run_trials<Out>(trials, seed, [&](uint64_t s) {
    Rng rng(s);
    auto pi = random_preservation_instance(rng, f, 2, 2, true);
    bool uniform1 = rng.below(4) == 0;
    ProductDistribution D{{uniform1 ? Pmf::uniform({2}) : random_pmf(rng, {2}, false), random_pmf(rng, {2}, false)}};
    std::vector<Rational> claims;
    for (size_t i = 0; i < 2; ++i) {
      Rational u = ratio(rng.below(3), 2);
      claims.push_back(D.factors[0][i] * (1 - tau * u));
      claims.back().canonicalize();
    }
    auto rep = check_product_dpl(pi.X, D, pi.Yp, pi.inst, claims, tau, opt);
    Out o;
    if (!rep.claims_in_range || !rep.granular_bound || (!rep.vacuous && !rep.holds)) {
      o.code = 2;
    } else {
      o.code = rep.vacuous ? 0 : 1;
    }
    if (uniform1) {
      auto e = check_distance_preservation(pi.X, D.joint(), pi.Yp, pi.inst, opt);
      o.cross = e.vacuous || e.holds ? 1 : 2;
    }
    return o;
  });
  uint64_t nonvac = 0, bad = 0, cross = 0, cross_bad = 0;
  for (const auto& o : res) {
    nonvac += o.code != 0;
    bad += o.code == 2;
    cross += o.cross != 0;
    cross_bad += o.cross == 2;
  }
  LemmaReport out{"product-preservation", bad == 0 && cross_bad == 0 && nonvac > 0, false, {}};
  out.detail = json{{"instances", trials},         {"non_vacuous", nonvac}, {"violations", bad},
                    {"uniform_first_factor", cross}, {"cross_check_violations", cross_bad}};
  return out;
}

LemmaReport run_subspace(uint64_t certified_target, uint64_t seed) {
  const PrimeField f(5);
  const size_t n = 4;
  const uint64_t mc = 100;
  struct Out {
    bool certified = false;
    bool exact_ok = true;
    bool mc_ok = true;
    uint64_t close = 0;
    double exact = 0;
  };
  const uint64_t attempts = 4 * certified_target;
  auto res = run_trials<Out>(attempts, seed, [&](uint64_t s) {
    Rng rng(s);
    auto rand_vec = [&] {
      std::vector<Fe> v(n);
      for (auto& x : v) x = f.of(rng.below(5));
      return v;
    };
    std::vector<std::vector<Fe>> S(1 + rng.below(3)), T(rng.below(3));
    for (auto& v : S) v = rand_vec();
    for (auto& v : T) v = rand_vec();
    Metric metric = rng.coin() ? Metric::uniform({n}) : Metric::hybrid(random_pmf(rng, {n}), Pmf::uniform({n}));
    auto rep = check_subspace_lemma(f, S, T, metric, mc, derive_seed(s, 1));
    Out o;
    if (rep.vacuous) return o;
    o.certified = true;
    o.exact_ok = to_double(rep.exact_fraction) <= rep.bound;
    o.mc_ok = rep.holds;
    o.close = rep.close;
    o.exact = to_double(rep.exact_fraction);
    return o;
  });
  uint64_t certified = 0, exact_bad = 0, mc_flags = 0, close = 0;
  double max_exact = 0;
  for (const auto& o : res) {
    if (!o.certified || certified == certified_target) continue;
    ++certified;
    exact_bad += !o.exact_ok;
    mc_flags += !o.mc_ok;
    close += o.close;
    max_exact = std::max(max_exact, o.exact);
  }
  const double bound = 1.0 / 4.0;
  const uint64_t draws = certified * mc;
  const double frac = draws ? static_cast<double>(close) / static_cast<double>(draws) : 0;
  const bool stat_ok = frac <= three_sigma(bound, draws);
  LemmaReport out{"subspace", certified >= certified_target && exact_bad == 0 && stat_ok, exact_bad == 0, {}};
  out.detail = json{{"certified", certified},    {"exact_violations", exact_bad}, {"max_exact_fraction", max_exact},
                    {"draws", draws},            {"close_fraction", frac},        {"bound", bound},
                    {"three_sigma_limit", three_sigma(bound, draws)}, {"per_instance_3sigma_flags", mc_flags}};
  return out;
}

LemmaReport run_fold_soundness(uint64_t instances, uint64_t seed, const EnumerationOptions& opt) {
  const PrimeField f(5);
  const uint64_t per = 200;
  struct Out {
    bool certified = false;
    bool found = true;
    uint64_t miss = 0, fail = 0;
    double support_bound = 0, sound_bound = 0;
    bool holds = true;
  };
  const uint64_t attempts = 4 * instances;
  const size_t kappa = default_kappa(2, 1);
  auto res = run_trials<Out>(attempts, seed, [&](uint64_t s) {
    Rng rng(s);
    auto pi = random_preservation_instance(rng, f, 2, 2, rng.below(4) == 0);
    auto rep = check_fold_soundness_claims(pi.X, pi.D, pi.Yp, pi.inst, kappa, per, derive_seed(s, 1), opt);
    Out o;
    if (rep.vacuous) return o;
    o.certified = true;
    o.found = rep.row_selection_found;
    o.miss = rep.support_miss;
    o.fail = rep.sound_fail;
    o.support_bound = rep.support_bound;
    o.sound_bound = rep.sound_bound;
    o.holds = rep.holds;
    return o;
  });
  uint64_t certified = 0, not_found = 0, miss = 0, fail = 0, flags = 0;
  double support_bound = 0, sound_bound = 0;
  for (const auto& o : res) {
    if (!o.certified || certified == instances) continue;
    ++certified;
    not_found += !o.found;
    miss += o.miss;
    fail += o.fail;
    flags += !o.holds;
    support_bound = o.support_bound;
    sound_bound = o.sound_bound;
  }
  const uint64_t draws = certified * per;
  const double miss_rate = draws ? static_cast<double>(miss) / static_cast<double>(draws) : 0;
  const double fail_rate = draws ? static_cast<double>(fail) / static_cast<double>(draws) : 0;
  const bool stat_ok = miss_rate <= three_sigma(support_bound, draws) && fail_rate <= three_sigma(sound_bound, draws);
  LemmaReport out{"fold-soundness", certified >= instances && not_found == 0 && stat_ok, not_found == 0, {}};
  out.detail = json{{"instances", certified},       {"kappa", kappa},           {"row_selection_missing", not_found},
                    {"draws", draws},               {"support_miss_rate", miss_rate}, {"support_bound", support_bound},
                    {"sound_fail_rate", fail_rate}, {"sound_bound", sound_bound},
                    {"per_instance_3sigma_flags", flags}};
  return out;
}

LemmaReport run_random_pval_distance(uint64_t draws, uint64_t seed, const EnumerationOptions& opt) {
  auto rep = check_random_pval_min_distance(PrimeField(5), 2, 2, Rational(1, 4), draws, seed, opt);
  LemmaReport out{"random-pval-distance", rep.holds, true, {}};
  out.detail = json{{"t", rep.t},         {"draws", rep.draws}, {"hits", rep.hits},
                    {"frequency", rep.frequency}, {"bound", rep.bound}, {"sigma", rep.sigma}};
  return out;
}

}  // namespace

std::vector<std::string> lemma_ids() {
  return {"fold-preservation", "subspace", "product-preservation", "fold-soundness", "granular-counts", "granular-distance", "marginal-dispersion",
          "tv-shift", "random-pval-distance"};
}

LemmaReport cmd_check_lemma(const std::string& id, uint64_t trials, uint64_t seed, uint64_t budget) {
  const EnumerationOptions opt{budget, Exec::Serial};
  auto pick = [&](uint64_t dflt) { return trials ? trials : dflt; };
  if (id == "fold-preservation") return run_fold_preservation(pick(1000), seed, opt);
  if (id == "product-preservation") return run_product_preservation(pick(500), seed, opt);
  if (id == "subspace") return run_subspace(pick(1000), seed);
  if (id == "fold-soundness") return run_fold_soundness(pick(200), seed, opt);
  if (id == "granular-counts") return exact_report(id, check_granular_counts(pick(10000), seed));
  if (id == "granular-distance") return exact_report(id, check_granular_distance(pick(1000), seed));
  if (id == "marginal-dispersion") return exact_report(id, check_marginal_dispersion(pick(10000), seed));
  if (id == "tv-shift") return exact_report(id, check_tv_shift(pick(1000), seed));
  if (id == "random-pval-distance") return run_random_pval_distance(pick(500), seed, opt);
  throw ConfigError("unknown lemma id: " + id);
}

// ---- fixtures -------------------------------------------------------------

namespace {

// [start, length, value] runs
json runs_of(const std::vector<std::string>& vals) {
  json out = json::array();
  for (size_t i = 0; i < vals.size();) {
    size_t j = i;
    while (j < vals.size() && vals[j] == vals[i]) ++j;
    out.push_back(json::array({i, j - i, vals[i]}));
    i = j;
  }
  return out;
}

json pmf_runs(const Pmf& D) {
  std::vector<std::string> v;
  for (const auto& q : D.masses()) v.push_back(to_string(q));
  return runs_of(v);
}

json tensor_runs(const InputTensor& X) {
  std::vector<std::string> v;
  for (Fe x : X.data) v.push_back(std::to_string(x.v));
  return runs_of(v);
}

}  // namespace

json ham_lb_fixture_json(const HamLbFixture& fx) {
  json j;
  j["kind"] = "ham-lb";
  j["n"] = fx.n;
  j["eps"] = to_string(fx.eps);
  j["exponent_outer"] = fx.exponent_outer;
  j["exponent_inner"] = fx.exponent_inner;
  j["sizes"] = {fx.size1, fx.size2, fx.size3};
  j["w"] = fx.w;
  j["x_ones_mass"] = to_string(fx.x_ones_mass);
  j["y_ones_mass"] = to_string(fx.y_ones_mass);
  j["far"] = to_string(fx.far);
  j["far_at_least_eps"] = fx.far >= Distance::of(fx.eps);
  j["D1"] = pmf_runs(fx.D1);
  j["D2"] = pmf_runs(fx.D2);
  j["X"] = tensor_runs(fx.X);
  j["Y"] = tensor_runs(fx.Y);
  return j;
}

json product_fixture_json(const ProductFixture& fx, size_t k, size_t m) {
  json j;
  j["kind"] = "product";
  j["k"] = k;
  j["m"] = m;
  json factors = json::array();
  for (const auto& F : fx.D.factors) {
    json masses = json::array();
    for (const auto& q : F.masses()) masses.push_back(to_string(q));
    factors.push_back(masses);
  }
  j["factors"] = factors;
  j["factor_input_bits"] = fx.factor_input_bits;
  json gates = json::array();
  for (const auto& g : fx.C.gates()) {
    if (g.op == GateOp::Not) {
      gates.push_back(json::array({"not", g.a}));
    } else {
      gates.push_back(json::array({g.op == GateOp::And ? "and" : "xor", g.a, g.b}));
    }
  }
  j["circuit"] = json{{"inputs", fx.C.input_bits()}, {"gates", gates}, {"outputs", fx.C.outputs()}};
  j["rho"] = to_string(dispersion_rho(fx.D.joint()).rho);
  return j;
}

}  // namespace dfipp
