#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dfipp/experiments.hpp"

using namespace dfipp;
using nlohmann::json;

namespace {

ExperimentConfig cfg_of(const char* text) { return parse_config(json::parse(text)); }

std::string cli() {
  const char* p = std::getenv("DFIPP_CLI");
  return p ? p : "";
}

int run_cli(const std::string& args) {
  int st = std::system((cli() + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "dfipp_experiments_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Config, Defaults) {
  auto c = cfg_of(R"({"protocol":"fin_ipp"})");
  EXPECT_EQ(c.field_modulus, 17u);
  EXPECT_EQ(c.eps, Rational(1, 4));
  EXPECT_EQ(c.trials, 1u);
  EXPECT_EQ(cfg_of(R"({"protocol":"rlcc"})").field_modulus, 2u);
}

TEST(Config, RejectsUnknownKeys) {
  EXPECT_THROW(cfg_of(R"({"protocol":"echo","bogus":1})"), ConfigError);
  EXPECT_THROW(cfg_of(R"({"protocol":"nope"})"), ConfigError);
  EXPECT_THROW(cfg_of(R"({"protocol":"fin_ipp","distribution":{"kind":"uniform","x":1}})"), ConfigError);
  EXPECT_THROW(cfg_of(R"({"protocol":"fin_ipp","input":{"kind":"member","y":1}})"), ConfigError);
  EXPECT_THROW(cfg_of(R"({"protocol":"fin_ipp","prover":"sneaky"})"), ConfigError);
  EXPECT_THROW(cfg_of(R"({"protocol":"fin_ipp","eps":0.25})"), ConfigError);
  EXPECT_THROW(cfg_of(R"({"k":2})"), ConfigError);
}

TEST(Run, EchoCsvAndJson) {
  auto rec = cmd_run(cfg_of(R"({"protocol":"echo","count":5,"trials":4})"), default_budget());
  ASSERT_EQ(rec.trials.size(), 4u);
  std::istringstream csv(run_csv(rec));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "protocol,n,k,m,r,eps,rho,field,queries,samples,comm_bits,messages,accepted,reject_reason,seed");
  int lines = 0;
  for (std::string line; std::getline(csv, line);) lines += !line.empty();
  EXPECT_EQ(lines, 4);
  json j = run_json(rec);
  EXPECT_EQ(j["accepted"], 4);
  EXPECT_EQ(j["rejected"], 0);
  EXPECT_EQ(j["config_hash"], config_hash(rec.cfg.raw));
  EXPECT_EQ(j["comm_bits"]["min"], 2 * 5 * 5);
}

TEST(Run, SeedDeterminism) {
  auto c = cfg_of(R"({"protocol":"fin_ipp","field_modulus":5,"k":2,"m":2,"trials":6,"input":{"kind":"random","t":2},"prover":"fixed-alternative"})");
  auto a = cmd_run(c, default_budget(), Exec::Serial);
  auto b = cmd_run(c, default_budget(), Exec::Parallel);
  ASSERT_EQ(a.trials.size(), b.trials.size());
  for (size_t i = 0; i < a.trials.size(); ++i) {
    EXPECT_EQ(a.trials[i].seed, b.trials[i].seed);
    EXPECT_EQ(a.trials[i].verdict.accepted, b.trials[i].verdict.accepted);
    EXPECT_EQ(a.trials[i].ledger.queries, b.trials[i].ledger.queries);
  }
  EXPECT_EQ(a.transcript_jsonl, b.transcript_jsonl);
}

TEST(Replay, RecordedRunsMatch) {
  for (const char* text :
       {R"({"protocol":"echo","count":3})", R"({"protocol":"ham","n":32,"w":10,"eps":"1/8"})",
        R"({"protocol":"fin_ipp","field_modulus":5,"k":2,"m":2,"r":2})",
        R"({"protocol":"df_ipp_nc","field_modulus":17,"k":2,"m":3,"distribution":{"kind":"random"}})",
        R"({"protocol":"whitebox","field_modulus":17,"k":2,"m":2,"distribution":{"kind":"product","profile":"dyadic-random"}})",
        R"({"protocol":"rlcc","l":3,"eps":"1/4"})", R"({"protocol":"learnable","l":3})"}) {
    auto rec = cmd_run(cfg_of(text), default_budget());
    auto rep = cmd_replay(rec.transcript_jsonl, default_budget());
    EXPECT_TRUE(rep.match) << text << ": " << rep.detail;
    EXPECT_EQ(rep.recorded.accepted, rep.replayed.accepted);
    EXPECT_EQ(rep.recomputed_comm_bits, rep.recorded_ledger.comm_bits);
  }
}

TEST(Replay, TamperedMessageDiverges) {
  auto rec = cmd_run(cfg_of(R"({"protocol":"echo","count":3})"), default_budget());
  std::string s = rec.transcript_jsonl;
  size_t at = s.find("\"index\":1,");
  ASSERT_NE(at, std::string::npos);
  size_t line = s.rfind('\n', at) + 1;
  size_t hex = s.find("\"hex\":\"", line) + 7;
  s[hex] = s[hex] == '0' ? '1' : '0';
  auto rep = cmd_replay(s, default_budget());
  EXPECT_FALSE(rep.match);
  ASSERT_TRUE(rep.first_divergent.has_value());
  EXPECT_EQ(*rep.first_divergent, 1u);
}

TEST(Lemma, IdsAndCheap) {
  auto ids = lemma_ids();
  EXPECT_NE(std::find(ids.begin(), ids.end(), "tv-shift"), ids.end());
  EXPECT_NE(std::find(ids.begin(), ids.end(), "subspace"), ids.end());
  auto rep = cmd_check_lemma("tv-shift", 40, 3, default_budget());
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.exit_code(), kExitPass);
  EXPECT_THROW(cmd_check_lemma("nope", 1, 1, default_budget()), ConfigError);
}

TEST(Cli, ExitCodes) {
  if (cli().empty()) GTEST_SKIP() << "DFIPP_CLI not set";
  auto good = scratch("echo.json"), bad = scratch("bad.json"), big = scratch("big.json");
  std::ofstream(good) << R"({"protocol":"echo","count":4,"trials":2})";
  std::ofstream(bad) << R"({"protocol":"echo","bogus":1})";
  std::ofstream(big)
      << R"({"protocol":"fin_ipp","field_modulus":17,"k":2,"m":4,"prover":"fixed-alternative","input":{"kind":"random","t":2}})";
  auto out = scratch("echo").string();
  EXPECT_EQ(run_cli("run --config " + good.string() + " --out " + out), 0);
  EXPECT_TRUE(std::filesystem::exists(out + ".csv"));
  EXPECT_TRUE(std::filesystem::exists(out + ".json"));
  EXPECT_EQ(run_cli("replay " + out + ".transcript.jsonl"), 0);
  EXPECT_EQ(run_cli("run --config " + bad.string() + " --out " + scratch("bad").string()), 2);
  EXPECT_EQ(run_cli("run --config " + big.string() + " --budget 10 --out " + scratch("big").string()), 3);
  EXPECT_EQ(run_cli("check-lemma tv-shift --trials 20"), 0);
  auto fx = scratch("fx.json");
  EXPECT_EQ(run_cli("gen-fixture product --k 2 --m 2 --out " + fx.string()), 0);
  std::ifstream in(fx);
  json j = json::parse(in);
  EXPECT_EQ(j["kind"], "product");
  EXPECT_EQ(j["factors"].size(), 2u);
}
