#include <benchmark/benchmark.h>

#include "hecke/hecke_set.hpp"
#include "hecke/polarization.hpp"

using namespace hecke;

namespace {

ShellQuery shell_query(long long target) {
  return ShellQuery::exact(SelfAdjointMatrix::diagonal({Rational(2), Rational(1, 2)}), Rational(target));
}

CountQuery count_query() {
  const SplitPrime p5 = SplitPrime::above(5), p13 = SplitPrime::above(13);
  return CountQuery{SelfAdjointMatrix::diagonal({Rational(1), Rational(5)}), HeckeCosetSpec{p5, p13, 2, 2},
                    std::nullopt, GaussInt(1)};
}

void BM_ShellSerial(benchmark::State& state) {
  const ShellQuery q = shell_query(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_serial(q));
}

void BM_ShellParallel(benchmark::State& state) {
  const ShellQuery q = shell_query(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_parallel(q));
}

void BM_PolarizationSerial(benchmark::State& state) {
  const auto forms = polarization_fixtures(2);
  const SplitPrime pi = SplitPrime::above(5);
  for (auto _ : state) benchmark::DoNotOptimize(polarization_sweep_serial(forms, pi, 2, 2));
}

void BM_PolarizationParallel(benchmark::State& state) {
  const auto forms = polarization_fixtures(2);
  const SplitPrime pi = SplitPrime::above(5);
  for (auto _ : state) benchmark::DoNotOptimize(polarization_sweep_parallel(forms, pi, 2, 2));
}

void BM_HeckeSerial(benchmark::State& state) {
  const CountQuery q = count_query();
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_S_serial(q));
}

void BM_HeckeParallel(benchmark::State& state) {
  const CountQuery q = count_query();
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_S(q));
}

}  // namespace

BENCHMARK(BM_ShellSerial)->Arg(520)->Arg(2080)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ShellParallel)->Arg(520)->Arg(2080)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PolarizationSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PolarizationParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HeckeSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HeckeParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
