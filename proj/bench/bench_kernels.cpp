// Serial reference versus OpenMP kernels. Arg 0 runs the serial path, 1 the parallel one.

#include <benchmark/benchmark.h>

#include "audiofp/analysis.hpp"
#include "audiofp/simulate.hpp"
#include "audiofp/synth.hpp"

using namespace audiofp;

namespace {

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::Serial : Execution::Parallel;
}

const std::vector<UserRecord>& population() {
  static const std::vector<UserRecord> records = [] {
    PopulationConfig cfg = field_study_config();
    cfg.num_users = 1000;
    return generate_population(cfg, Engine());
  }();
  return records;
}

void BM_SynthSquare(benchmark::State& state) {
  OscillatorSpec spec;
  spec.shape = WaveShape::Square;
  spec.frequency = 100.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(synth_wave(spec, 44100.0, 1.0, mode(state)));
  }
}

void BM_Population(benchmark::State& state) {
  PopulationConfig cfg = field_study_config();
  cfg.num_users = 500;
  const Engine engine;
  generate_population(cfg, engine);  // warm the digest cache
  for (auto _ : state) {
    if (mode(state) == Execution::Serial) {
      benchmark::DoNotOptimize(generate_population_serial(cfg, engine));
    } else {
      benchmark::DoNotOptimize(generate_population(cfg, engine));
    }
  }
}

void BM_Stability(benchmark::State& state) {
  const auto& records = population();
  for (auto _ : state) {
    benchmark::DoNotOptimize(stability(records, VectorId::AM, 3, mode(state)));
  }
}

void BM_CompareVectors(benchmark::State& state) {
  const auto per_vector = collate_all(population());
  for (auto _ : state) {
    benchmark::DoNotOptimize(compare_vectors(per_vector, mode(state)));
  }
}

}  // namespace

BENCHMARK(BM_SynthSquare)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Population)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Stability)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CompareVectors)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
