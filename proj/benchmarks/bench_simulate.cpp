#include <benchmark/benchmark.h>

#include "shieldrep/harness/scenario.hpp"

namespace {

using namespace shieldrep;

void BM_Simulate(benchmark::State& state) {
  ScenarioConfig cfg;
  cfg.protocol = static_cast<Protocol>(state.range(0));
  cfg.shielded = state.range(1) != 0;
  cfg.workload.op_count = 200;
  cfg.workload.value_size = 256;
  const auto ops = harness::gen_workload(cfg.workload, cfg.seed);
  std::size_t completed = 0;
  Tick ticks = 0;
  for (auto _ : state) {
    auto r = harness::simulate(cfg, ops);
    completed += r.completed;
    ticks += r.ticks;
  }
  state.SetLabel(std::string(to_string(cfg.protocol)) + (cfg.shielded ? " shielded" : " plain"));
  state.counters["ops_per_tick"] =
      ticks ? static_cast<double>(completed) / static_cast<double>(ticks) : 0.0;
  state.SetItemsProcessed(static_cast<std::int64_t>(completed));
}
BENCHMARK(BM_Simulate)
    ->ArgsProduct({{0, 1, 2, 3}, {0, 1}})
    ->Unit(benchmark::kMillisecond);

}  // namespace
