// Serial reference vs OpenMP kernels. Thread count comes from OMP_NUM_THREADS.
#include "menos/builtin.hpp"
#include "menos/oracle.hpp"
#include "menos/sweep.hpp"

#include <benchmark/benchmark.h>

#include <numbers>

using namespace menos;

namespace {

NoiseFunctional bell_functional() {
  const StatisticalModel two = tensor_model(qubit_phase_dephasing(), 2);
  const ParamPoint t = two.point({std::numbers::pi / 4, 0.05});
  const HermitianOperator rho = two.state_at(t);
  const auto d = two.derivatives_at(t);
  const FisherBundle b = fisher_bundle(rho, d, bell_povm());
  return NoiseFunctional(a_tensor(b, d, rho), b.fisher);
}

SweepSpec hg_sweep() {
  SweepSpec s;
  s.model = ModelId::PointSources;
  s.fixed = {{"x_c", 0.0}, {"q", 0.3}};
  s.sweep = parse_sweep_range("dx:0.01:0.5:32:log");
  s.oracle_samples = 2000;
  return s;
}

void BM_OracleSerial(benchmark::State& st) {
  const NoiseFunctional x = bell_functional();
  for (auto _ : st) benchmark::DoNotOptimize(noise_search_oracle_serial(x, st.range(0), 7).best_x);
}

void BM_OracleParallel(benchmark::State& st) {
  const NoiseFunctional x = bell_functional();
  for (auto _ : st) benchmark::DoNotOptimize(noise_search_oracle(x, st.range(0), 7).best_x);
}

void BM_SweepSerial(benchmark::State& st) {
  const SweepSpec s = hg_sweep();
  for (auto _ : st) benchmark::DoNotOptimize(run_sweep_serial(s).size());
}

void BM_SweepParallel(benchmark::State& st) {
  const SweepSpec s = hg_sweep();
  for (auto _ : st) benchmark::DoNotOptimize(run_sweep(s).size());
}

}  // namespace

BENCHMARK(BM_OracleSerial)->Arg(1000)->Arg(20000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_OracleParallel)->Arg(1000)->Arg(20000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SweepParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
