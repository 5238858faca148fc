// Serial reference vs OpenMP paths for the two hot kernels.
#include <benchmark/benchmark.h>

#include "dfipp/exec.hpp"
#include "dfipp/experiments.hpp"
#include "dfipp/nc.hpp"

using namespace dfipp;

namespace {

struct PvalCase {
  InputTensor X;
  PvalInstance inst;
};

PvalCase make_case(uint64_t q, size_t m) {
  PrimeField f(q);
  Rng rng(42);
  InputTensor X = InputTensor::cube(f, 2, m);
  for (auto& x : X.data) x = f.of(rng.below(q));
  auto inst = generate_pval_claims(ClaimGenerator{ClaimMode::Honest, 1, {}}, X, Rational(1, 4), rng);
  for (auto& x : X.data) x = f.of(rng.below(q));
  return {X, inst};
}

void BM_ClosestMember(benchmark::State& state, Exec exec) {
  auto c = make_case(static_cast<uint64_t>(state.range(0)), 2);
  auto metric = Metric::uniform({2, 2});
  for (auto _ : state) {
    benchmark::DoNotOptimize(closest_pval_member(c.X, c.inst, metric, EnumerationOptions{1ull << 32, exec}));
  }
}

void BM_RunTrials(benchmark::State& state, Exec exec) {
  auto cfg = parse_config(nlohmann::json::parse(
      R"({"protocol":"fin_ipp","field_modulus":17,"k":2,"m":4,"trials":)" + std::to_string(state.range(0)) + "}"));
  for (auto _ : state) benchmark::DoNotOptimize(cmd_run(cfg, default_budget(), exec));
}

}  // namespace

BENCHMARK_CAPTURE(BM_ClosestMember, serial, Exec::Serial)->Arg(5)->Arg(11)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ClosestMember, parallel, Exec::Parallel)->Arg(5)->Arg(11)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_RunTrials, serial, Exec::Serial)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_RunTrials, parallel, Exec::Parallel)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
