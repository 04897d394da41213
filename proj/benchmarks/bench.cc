#include <benchmark/benchmark.h>

#include "orchestra/appropriateness.h"
#include "orchestra/orchestrator.h"
#include "orchestra/rogers.h"
#include "orchestra/scenario.h"
#include "orchestra/simulation.h"

namespace {

using namespace orchestra;

void BM_SelectAgent(benchmark::State& state) {
  const auto agents = static_cast<std::size_t>(state.range(0));
  BeliefState beliefs = BeliefState::Uniform(agents, 8);
  CostTable costs = CostTable::Uniform(agents, 8);
  FeasibilityMask mask;
  TaskContext task{0, 3};
  for (auto _ : state) {
    benchmark::DoNotOptimize(SelectAgent(beliefs, costs, mask, task, PointEstimator::kMap));
  }
}
BENCHMARK(BM_SelectAgent)->Arg(4)->Arg(16)->Arg(64);

void BM_OrchestratedRun(benchmark::State& state) {
  ScenarioConfig c = BuiltinScenario(Profile::kVarying);
  c.stream_length = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Run(c, Policy::Orchestrated()).summary.correct);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_OrchestratedRun)->Arg(1000)->Arg(10000);

void BM_RogersStep(benchmark::State& state) {
  rogers::Config c;
  c.variant = static_cast<rogers::Variant>(state.range(0));
  rogers::Simulation sim(c);
  for (auto _ : state) sim.Step();
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.population));
}
BENCHMARK(BM_RogersStep)
    ->Arg(static_cast<int>(rogers::Variant::kBaseline))
    ->Arg(static_cast<int>(rogers::Variant::kOrchestrated));

void BM_Theorem1(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(Theorem1Verify(0.5, 0.01, 10000, 1));
}
BENCHMARK(BM_Theorem1);

}  // namespace
BENCHMARK_MAIN();
