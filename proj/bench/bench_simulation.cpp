#include <benchmark/benchmark.h>

#include "tcbind/gap_solver.hpp"
#include "tcbind/simulator.hpp"

namespace {

const tcbind::MarketSpec kSpec({0.08, 0.16, 0.0, 5.0, 0.01, 0.5});

tcbind::sim::SimConfig config(int paths) {
  tcbind::sim::SimConfig c;
  c.horizon_years = 10.0;
  c.n_paths = static_cast<std::size_t>(paths);
  return c;
}

void BM_SolveGap(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(tcbind::solve_gap(kSpec).lambda);
}
BENCHMARK(BM_SolveGap);

void BM_SimulateSerial(benchmark::State& state) {
  const auto gap = tcbind::solve_gap(kSpec);
  const auto c = config(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tcbind::sim::run_serial(kSpec, gap, c).sht.mean);
  state.SetItemsProcessed(state.iterations() * state.range(0) * 10000);
}
BENCHMARK(BM_SimulateSerial)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_SimulateOpenMP(benchmark::State& state) {
  const auto gap = tcbind::solve_gap(kSpec);
  const auto c = config(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tcbind::sim::run(kSpec, gap, c).sht.mean);
  state.SetItemsProcessed(state.iterations() * state.range(0) * 10000);
}
BENCHMARK(BM_SimulateOpenMP)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
