#include <benchmark/benchmark.h>

#include "rarexact/cmdp.hpp"
#include "rarexact/exact_tests.hpp"
#include "rarexact/montecarlo.hpp"
#include "rarexact/oc.hpp"

using namespace rarexact;

namespace {

void BM_ForwardBrar(benchmark::State& state) {
  const Policy p(BayesianRar{}, static_cast<int>(state.range(0)), 6);
  for (auto _ : state) benchmark::DoNotOptimize(forward_g(p));
}
BENCHMARK(BM_ForwardBrar)->Arg(50)->Arg(100)->Arg(250)->Unit(benchmark::kMillisecond);

void BM_ForwardDbcd(benchmark::State& state) {
  const Policy p(DbcdNeyman{}, static_cast<int>(state.range(0)), 6);
  for (auto _ : state) benchmark::DoNotOptimize(forward_g(p));
}
BENCHMARK(BM_ForwardDbcd)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_ConditionalRule(benchmark::State& state) {
  const auto g = forward_g(Policy(BayesianRar{}, static_cast<int>(state.range(0)), 6));
  for (auto _ : state) benchmark::DoNotOptimize(conditional_rule(g, 0.05));
}
BENCHMARK(BM_ConditionalRule)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_UnconditionalRule(benchmark::State& state) {
  const auto g = forward_g(Policy(BayesianRar{}, static_cast<int>(state.range(0)), 6));
  for (auto _ : state) benchmark::DoNotOptimize(unconditional_rule(g, 0.05));
}
BENCHMARK(BM_UnconditionalRule)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_GbRule(benchmark::State& state) {
  const auto g = forward_g(Policy(BayesianRar{}, static_cast<int>(state.range(0)), 6));
  for (auto _ : state) benchmark::DoNotOptimize(gb_rule(g, 0.05));
}
BENCHMARK(BM_GbRule)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_OcProfile(benchmark::State& state) {
  const auto g = forward_g(Policy(BayesianRar{}, 50, 6));
  const auto grid = alternative_curves({0.01, 0.1, 0.3, 0.5, 0.7, 0.9}, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(profile(g, AsymptoticRule{}, grid));
}
BENCHMARK(BM_OcProfile)->Unit(benchmark::kMillisecond);

void BM_LagrangianBackward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<double> reward(LayerIndex(n, 6).size(), 0.0);
  LayerIndex(n, 6).for_each([&](std::size_t i, const TrialState& x) { reward[i] = x.s_d > x.s_c ? 1.0 : 0.0; });
  const auto rel = relative_reward(reward, n, 6);
  for (auto _ : state) benchmark::DoNotOptimize(lagrangian_backward(rel, n, 6, 0.95));
}
BENCHMARK(BM_LagrangianBackward)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_SimulateTrials(benchmark::State& state) {
  const Policy p(BayesianRar{}, 50, 6);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_terminal_states(p, 0.3, 0.6, 10000, 1));
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_SimulateTrials)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
