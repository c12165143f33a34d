// Microbenchmarks for the batch forward paths. The pass/fail speed checks
// live in the test suite; these exist for profiling and tuning.

#include <benchmark/benchmark.h>

#include "lutkan/compiler.hpp"
#include "lutkan/model_gen.hpp"
#include "lutkan/runtime.hpp"

namespace {

using namespace lutkan;

const KanLayerSpec& layer() {
  static const KanLayerSpec l = gen_sanity_layer(0);
  return l;
}

const Matrix& inputs() {
  static const Matrix X = gen_inputs(1, 1024, 10, -1.0, 1.0, true);
  return X;
}

LutLayerArtifact make_artifact(int L) {
  QuantConfig q;
  q.samples_per_segment = L;
  return compile_layer(layer(), q, OobConfig{});
}

void BM_SplineForward(benchmark::State& state) {
  const Tier tier = state.range(0) ? Tier::Optimized : Tier::Scalar;
  for (auto _ : state) {
    const Matrix Y = layer_forward_batch(layer(), inputs(), tier);
    benchmark::DoNotOptimize(Y.data.data());
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(inputs().rows));
}
BENCHMARK(BM_SplineForward)->Arg(0)->Arg(1)->ArgName("optimized")->Unit(benchmark::kMicrosecond);

void BM_LutForward(benchmark::State& state) {
  const Tier tier = state.range(0) ? Tier::Optimized : Tier::Scalar;
  const LutLayerArtifact artifact = make_artifact(static_cast<int>(state.range(1)));
  for (auto _ : state) {
    const auto [Y, stats] = lut_layer_forward_batch(artifact, inputs(), tier);
    benchmark::DoNotOptimize(Y.data.data());
    benchmark::DoNotOptimize(&stats);
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(inputs().rows));
}
BENCHMARK(BM_LutForward)
    ->Args({0, 32})
    ->Args({0, 128})
    ->Args({1, 32})
    ->Args({1, 128})
    ->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
