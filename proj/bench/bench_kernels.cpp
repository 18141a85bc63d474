// Serial reference kernels against the OpenMP ones on the same inputs.

#include "dclust/meanfield.hpp"
#include "dclust/oracle.hpp"
#include "dclust/particle.hpp"
#include "dclust/reference/serial.hpp"
#include "dclust/scenarios.hpp"

#include <benchmark/benchmark.h>

using namespace dclust;

namespace {

ScenarioConfig pool_config(std::int64_t n) {
  auto cfg = builtin_scenario("core_periphery_two");
  cfg.pool_size = n;
  return cfg;
}

void BM_PoolSerial(benchmark::State& state) {
  const auto cfg = pool_config(state.range(0));
  const auto layout = block_layout(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(reference::simulate_pool_serial(cfg, layout, 7));
  state.SetItemsProcessed(state.iterations() * state.range(0) * cfg.controls.steps());
}

void BM_PoolParallel(benchmark::State& state) {
  const auto cfg = pool_config(state.range(0));
  const auto layout = block_layout(cfg);
  PoolOptions opts;
  opts.exec.threads = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(simulate_pool(cfg, layout, 7, opts));
  state.SetItemsProcessed(state.iterations() * state.range(0) * cfg.controls.steps());
}

OracleOptions cloud(std::int64_t m, std::int64_t threads = 1) {
  OracleOptions o;
  o.particles = static_cast<std::size_t>(m);
  o.exec.threads = static_cast<int>(threads);
  return o;
}

void BM_OracleSerial(benchmark::State& state) {
  const auto cfg = builtin_scenario("one_cluster");
  const auto opts = cloud(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(reference::mv_solve_serial(cfg, 7, opts));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 2 * cfg.controls.steps());
}

void BM_OracleParallel(benchmark::State& state) {
  const auto cfg = builtin_scenario("one_cluster");
  const auto opts = cloud(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(mv_solve(cfg, 7, opts));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 2 * cfg.controls.steps());
}

void BM_MeanfieldEnsemble(benchmark::State& state) {
  auto cfg = builtin_scenario("core_periphery_two");
  cfg.controls.trials = 200;
  EnsembleOptions opts;
  opts.exec.threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_ensemble(cfg, opts));
  state.SetItemsProcessed(state.iterations() * cfg.controls.trials);
}

}  // namespace

BENCHMARK(BM_PoolSerial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PoolParallel)->ArgsProduct({{1000, 10000}, {1, 4}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_OracleSerial)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OracleParallel)->ArgsProduct({{10000, 100000}, {1, 4}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MeanfieldEnsemble)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
