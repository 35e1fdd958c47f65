#include <benchmark/benchmark.h>

#include <memory>

#include "bellqmc/estimators.hpp"
#include "bellqmc/ext_ensemble.hpp"
#include "bellqmc/model.hpp"
#include "bellqmc/sse.hpp"

using namespace bellqmc;

namespace {

ChainState warmed(const ModelSpec& model, double beta, int sweeps = 500) {
  ChainState st(std::make_shared<const OperatorTable>(model), beta, 1);
  for (int i = 0; i < sweeps; ++i) {
    sweep(st);
    grow_cutoff(st);
  }
  st.cutoff_frozen = true;
  return st;
}

void BM_ChainSweep(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  auto st = warmed(make_tfim(L, Boundary::periodic, 1.0), 4.0 * L);
  for (auto _ : state) sweep(st);
  state.counters["ops"] = st.ops.n;
}
BENCHMARK(BM_ChainSweep)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_TorusSweep(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  auto st = warmed(make_lgt(L, 0.3), 4.0 * L);
  for (auto _ : state) sweep(st);
  state.counters["ops"] = st.ops.n;
}
BENCHMARK(BM_TorusSweep)->Arg(3)->Arg(4)->Arg(8)->Unit(benchmark::kMicrosecond);

void BM_DiagonalUpdate(benchmark::State& state) {
  auto st = warmed(make_tfim(64, Boundary::periodic, 1.0), 64.0);
  for (auto _ : state) diagonal_update(st);
}
BENCHMARK(BM_DiagonalUpdate)->Unit(benchmark::kMicrosecond);

void BM_SwapMeasurement(benchmark::State& state) {
  const auto model = make_lgt(8, 0.3);
  auto st = warmed(model, 8.0, 100);
  const auto obs = renyi2_gauge_observable(model.lattice, square_region(model.lattice, 8), true);
  double acc = 0;
  for (auto _ : state) benchmark::DoNotOptimize(acc += obs.value(st.cfg0));
}
BENCHMARK(BM_SwapMeasurement);

void BM_ExtendedSweep(benchmark::State& state) {
  const auto model = make_lgt(4, 0.3);
  ExtEnsembleState ext(ChainState(std::make_shared<const OperatorTable>(model), 4.0, 2),
                       square_region(model.lattice, 4).interior, 0.5,
                       state.range(0) ? ExtMethod::subset_B : ExtMethod::analytic_B);
  for (int i = 0; i < 500; ++i) {
    ext_sweep(ext);
    grow_cutoff(ext.chain);
  }
  ext.chain.cutoff_frozen = true;
  for (auto _ : state) ext_sweep(ext);
}
BENCHMARK(BM_ExtendedSweep)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
