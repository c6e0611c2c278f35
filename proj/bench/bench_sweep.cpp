// Serial vs OpenMP sweep runners on the baseline sequential sweep and on a
// GC-heavy random-write sweep. Both runners produce identical results; this
// measures only wall time.

#include <benchmark/benchmark.h>

#include <filesystem>

#include "ssdsim/config.hpp"
#include "ssdsim/sweep.hpp"

namespace {

ssdsim::SsdConfig config_named(const char *name) {
  return ssdsim::load_config(std::filesystem::path(SSDSIM_SOURCE_DIR) / "configs" / name);
}

// A small device rewritten at several request sizes, so every point runs GC.
ssdsim::SsdConfig gc_sweep() {
  auto c = config_named("small_gc.cfg");
  c.workload.request_sizes = {4 << 10, 8 << 10, 16 << 10, 32 << 10, 64 << 10, 128 << 10};
  c.workload.total_bytes = 8 << 20;
  return c;
}

void run(benchmark::State &state, const ssdsim::SsdConfig &config, bool parallel) {
  const auto points = ssdsim::SweepSpec::from(config).points();
  const int jobs = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto results = parallel ? ssdsim::run_sweep_parallel(config, points, {}, jobs)
                            : ssdsim::run_sweep_serial(config, points);
    benchmark::DoNotOptimize(results.data());
  }
  state.counters["points"] = static_cast<double>(points.size());
}

void BM_BaselineSweepSerial(benchmark::State &state) {
  static const auto config = config_named("baseline.cfg");
  run(state, config, false);
}
void BM_BaselineSweepParallel(benchmark::State &state) {
  static const auto config = config_named("baseline.cfg");
  run(state, config, true);
}
void BM_GcSweepSerial(benchmark::State &state) {
  static const auto config = gc_sweep();
  run(state, config, false);
}
void BM_GcSweepParallel(benchmark::State &state) {
  static const auto config = gc_sweep();
  run(state, config, true);
}

}  // namespace

BENCHMARK(BM_BaselineSweepSerial)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BaselineSweepParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_GcSweepSerial)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_GcSweepParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
