#include "lkpolar/catalog.hpp"
#include "lkpolar/germ.hpp"
#include "lkpolar/lkmeasure.hpp"
#include "lkpolar/polar.hpp"

#include <benchmark/benchmark.h>

using namespace lkpolar;

static void BM_LkMeasureDisk(benchmark::State& state) {
  const Shape disk = shape_from_id("disk:1");
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(lk_measure(disk, k, RandomSource(1), {2000, 1, 50}).estimate.value);
}
BENCHMARK(BM_LkMeasureDisk)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

static void BM_ExchangeOctahedron(benchmark::State& state) {
  const Shape x = shape_from_id("octahedron");
  for (auto _ : state)
    benchmark::DoNotOptimize(exchange_lambda0(x, RandomSource(2), {state.range(0), 1, 50}).estimate.value);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ExchangeOctahedron)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_PolarSample(benchmark::State& state) {
  const char* id = state.range(0) == 0 ? "cube" : state.range(0) == 1 ? "sphere:1" : "torus:2:1";
  const PolarContext ctx{shape_from_id(id)};
  RandomSource rng(3);
  for (auto _ : state) {
    const LinearSubspace p = sample_grassmannian(3, 2, rng);
    benchmark::DoNotOptimize(polar_sample(ctx, p).total());
  }
  state.SetLabel(id);
}
BENCHMARK(BM_PolarSample)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);

static void BM_Sigma(benchmark::State& state) {
  const ConeGerm g = germ_from_id(state.range(0) == 0 ? "rays:5" : "halfplane:3");
  for (auto _ : state) benchmark::DoNotOptimize(sigma_invariant(g, 1, 1000, RandomSource(4)).estimate.value);
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_Sigma)->DenseRange(0, 1)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
