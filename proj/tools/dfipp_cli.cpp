#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "dfipp/experiments.hpp"

using nlohmann::json;
using namespace dfipp;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

int guarded(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget refusal: " << e.what() << "\n";
    return kExitBudget;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitExact;
  } catch (const json::exception& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitExact;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitExact;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distribution-free IPP simulator"};
  app.require_subcommand(1);

  std::string config_path, out_prefix = "run";
  std::optional<uint64_t> seed, trials, budget;

  auto* run = app.add_subcommand("run", "Run a protocol experiment from a JSON config");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--seed", seed);
  run->add_option("--trials", trials);
  run->add_option("--budget", budget, "enumeration budget");
  run->add_option("--out", out_prefix, "output prefix for .csv, .json and .transcript.jsonl");

  std::string lemma_id, lemma_out;
  auto* lemma = app.add_subcommand("check-lemma", "Check a lemma on random instances");
  lemma->add_option("id", lemma_id)->required();
  lemma->add_option("--trials", trials);
  lemma->add_option("--seed", seed);
  lemma->add_option("--budget", budget);
  lemma->add_option("--out", lemma_out, "write the report JSON here");

  std::string fixture_kind, fixture_out, profile = "uniform", eps_text = "1/100";
  size_t fx_n = 4096, fx_k = 2, fx_m = 2;
  double outer = kHamLbOuterExponent, inner = kHamLbInnerExponent;
  auto* fixture = app.add_subcommand("gen-fixture", "Generate a ham-lb or product fixture");
  fixture->add_option("kind", fixture_kind)->required()->check(CLI::IsMember({"ham-lb", "product"}));
  fixture->add_option("--n", fx_n);
  fixture->add_option("--eps", eps_text);
  fixture->add_option("--outer", outer, "outer exponent");
  fixture->add_option("--inner", inner, "inner exponent");
  fixture->add_option("--k", fx_k);
  fixture->add_option("--m", fx_m);
  fixture->add_option("--profile", profile);
  fixture->add_option("--seed", seed);
  fixture->add_option("--out", fixture_out);

  std::string transcript_path;
  auto* replay = app.add_subcommand("replay", "Re-run a verifier against a recorded transcript");
  replay->add_option("transcript", transcript_path)->required();
  replay->add_option("--budget", budget);

  CLI11_PARSE(app, argc, argv);
  const uint64_t bud = budget ? *budget : default_budget();

  if (*run) {
    return guarded([&] {
      json raw = json::parse(slurp(config_path));
      if (seed) raw["seed"] = *seed;
      if (trials) raw["trials"] = *trials;
      ExperimentConfig cfg = parse_config(raw);
      RunRecord rec = cmd_run(cfg, budget ? *budget : cfg.budget.value_or(bud));
      json summary = run_json(rec);
      write_file(out_prefix + ".csv", run_csv(rec));
      write_file(out_prefix + ".json", summary.dump(2) + "\n");
      write_file(out_prefix + ".transcript.jsonl", rec.transcript_jsonl);
      std::cout << summary.dump(2) << "\n";
      return kExitPass;
    });
  }
  if (*lemma) {
    return guarded([&] {
      LemmaReport rep = cmd_check_lemma(lemma_id, trials.value_or(0), seed.value_or(1), bud);
      json j{{"id", rep.id}, {"pass", rep.pass}, {"detail", rep.detail}};
      if (!lemma_out.empty()) write_file(lemma_out, j.dump(2) + "\n");
      std::cout << j.dump(2) << "\n";
      return rep.exit_code();
    });
  }
  if (*fixture) {
    return guarded([&] {
      json j;
      if (fixture_kind == "ham-lb") {
        j = ham_lb_fixture_json(gen_ham_lb_fixture(fx_n, parse_rational(eps_text), outer, inner));
      } else {
        j = product_fixture_json(gen_product_fixture(fx_k, fx_m, parse_profile(profile), seed.value_or(1)), fx_k, fx_m);
      }
      if (fixture_out.empty()) {
        std::cout << j.dump() << "\n";
      } else {
        write_file(fixture_out, j.dump() + "\n");
      }
      return kExitPass;
    });
  }
  if (*replay) {
    return guarded([&] {
      ReplayReport rep = cmd_replay(slurp(transcript_path), bud);
      json j{{"match", rep.match},
             {"detail", rep.detail},
             {"recorded_accepted", rep.recorded.accepted},
             {"replayed_accepted", rep.replayed.accepted},
             {"recomputed_comm_bits", rep.recomputed_comm_bits}};
      if (rep.first_divergent) j["first_divergent"] = *rep.first_divergent;
      std::cout << j.dump(2) << "\n";
      return rep.match ? kExitPass : kExitExact;
    });
  }
  return kExitPass;
}
