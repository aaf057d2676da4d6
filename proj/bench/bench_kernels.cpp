// Serial reference vs OpenMP kernels. Thread count follows OMP_NUM_THREADS.
#include <benchmark/benchmark.h>

#include "cattomo/measurement.hpp"
#include "cattomo/tomography.hpp"
#include "cattomo/wigner.hpp"

using namespace cattomo;

namespace {

const BlockDensity& cat_density() {
  static const BlockDensity rho = pure_to_density(synthesize_cat({0.0, 1.5}, 32));
  return rho;
}

void BM_WignerGridSerial(benchmark::State& state) {
  const auto axis = linspace(-3.0, 3.0, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(wigner_grid_serial(cat_density().block(0, 1), axis, axis));
}

void BM_WignerGridParallel(benchmark::State& state) {
  const auto axis = linspace(-3.0, 3.0, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(wigner_grid(cat_density().block(0, 1), axis, axis));
}

ScanSettings fig1_scan() {
  ScanSettings s;
  s.gamma_mod = 1.2;
  s.phases = uniform_phases(27);
  s.samples_per_phase = 1'000'000;
  s.seed = 7;
  return s;
}

void BM_PhaseScanSerial(benchmark::State& state) {
  BottleConfig b;
  b.eta = 0.9;
  for (auto _ : state) benchmark::DoNotOptimize(run_phase_scan_serial(cat_density(), fig1_scan(), b));
}

void BM_PhaseScanParallel(benchmark::State& state) {
  BottleConfig b;
  b.eta = 0.9;
  for (auto _ : state) benchmark::DoNotOptimize(run_phase_scan(cat_density(), fig1_scan(), b));
}

void BM_GSystemSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(GSystem::build_serial(1.2, 20, 12, 12, 0.9));
}

void BM_GSystemParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(GSystem::build(1.2, 20, 12, 12, 0.9));
}

}  // namespace

BENCHMARK(BM_WignerGridSerial)->Arg(31)->Arg(61)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WignerGridParallel)->Arg(31)->Arg(61)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PhaseScanSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PhaseScanParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GSystemSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GSystemParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
