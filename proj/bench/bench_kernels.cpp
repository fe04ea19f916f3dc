// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include "bipolymer/bigraph.hpp"
#include "bipolymer/oracle.hpp"
#include "bipolymer/polymer.hpp"
#include "bipolymer/spin.hpp"

namespace {

using namespace bipolymer;

const Biclique kColoringSplit{make_set({0, 1}), make_set({2, 3})};

void BM_PartitionFunctionSerial(benchmark::State& state) {
  const auto g = generate(static_cast<int>(state.range(0)), 3, 7);
  const auto system = SpinSystem::colorings(4);
  for (auto _ : state) benchmark::DoNotOptimize(exact_partition_function_serial(g, system));
}

void BM_PartitionFunctionParallel(benchmark::State& state) {
  const auto g = generate(static_cast<int>(state.range(0)), 3, 7);
  const auto system = SpinSystem::colorings(4);
  for (auto _ : state) benchmark::DoNotOptimize(exact_partition_function(g, system));
}

void BM_PhasesSerial(benchmark::State& state) {
  const auto g = generate(static_cast<int>(state.range(0)), 3, 7);
  const auto system = SpinSystem::hardcore(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(exact_phase_decomposition_serial(g, system));
}

void BM_PhasesParallel(benchmark::State& state) {
  const auto g = generate(static_cast<int>(state.range(0)), 3, 7);
  const auto system = SpinSystem::hardcore(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(exact_phase_decomposition(g, system));
}

void BM_CatalogSerial(benchmark::State& state) {
  const auto g = generate(static_cast<int>(state.range(0)), 3, 7);
  const auto system = SpinSystem::colorings(4);
  for (auto _ : state) benchmark::DoNotOptimize(build_catalog_serial(g, system, kColoringSplit, 3));
}

void BM_CatalogParallel(benchmark::State& state) {
  const auto g = generate(static_cast<int>(state.range(0)), 3, 7);
  const auto system = SpinSystem::colorings(4);
  for (auto _ : state) benchmark::DoNotOptimize(build_catalog(g, system, kColoringSplit, 3));
}

}  // namespace

BENCHMARK(BM_PartitionFunctionSerial)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PartitionFunctionParallel)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PhasesSerial)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PhasesParallel)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CatalogSerial)->Arg(12)->Arg(24)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CatalogParallel)->Arg(12)->Arg(24)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
