// Micro-benchmarks for the hot paths: distance scans, quantized search,
// codebook training, and classifier training. Run ./locus_bench
// --benchmark_filter=... to narrow.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "locus/classifier.hpp"
#include "locus/geo.hpp"
#include "locus/rng.hpp"
#include "locus/sampling.hpp"
#include "locus/vector_index.hpp"

namespace {

using namespace locus;

VectorSet gaussian_set(std::uint64_t seed, std::size_t count,
                       std::size_t dim) {
  Rng rng(seed);
  VectorSet vs;
  vs.dim = dim;
  vs.data.reserve(count * dim);
  for (std::size_t i = 0; i < count * dim; ++i)
    vs.data.push_back(static_cast<float>(rng.normal()));
  return vs;
}

std::vector<float> gaussian_query(std::uint64_t seed, std::size_t dim) {
  Rng rng(seed);
  std::vector<float> q(dim);
  for (float& x : q) x = static_cast<float>(rng.normal());
  return q;
}

void BM_ExactKnn(benchmark::State& state) {
  const std::size_t count = state.range(0), dim = 128;
  VectorSet vs = gaussian_set(1, count, dim);
  std::vector<float> q = gaussian_query(2, dim);
  for (auto _ : state)
    benchmark::DoNotOptimize(exact_knn(q, vs, 10));
  state.SetItemsProcessed(state.iterations() * count);
}
BENCHMARK(BM_ExactKnn)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_AdcKnn(benchmark::State& state) {
  const std::size_t count = state.range(0), dim = 128;
  VectorSet vs = gaussian_set(1, count, dim);
  PQConfig cfg;
  cfg.m = 16;
  cfg.k_centroids = 256;
  cfg.train_iters = 10;
  cfg.seed = 3;
  PQCodebook cb = train_codebook(vs, cfg);
  PQCodes codes = encode(vs, cb);
  std::vector<float> q = gaussian_query(2, dim);
  for (auto _ : state)
    benchmark::DoNotOptimize(adc_knn(q, codes, cb, 10));
  state.SetItemsProcessed(state.iterations() * count);
}
BENCHMARK(BM_AdcKnn)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_TrainCodebook(benchmark::State& state) {
  const std::size_t count = state.range(0), dim = 64;
  VectorSet vs = gaussian_set(4, count, dim);
  PQConfig cfg;
  cfg.m = 8;
  cfg.k_centroids = 64;
  cfg.train_iters = 10;
  cfg.seed = 5;
  for (auto _ : state)
    benchmark::DoNotOptimize(train_codebook(vs, cfg));
}
BENCHMARK(BM_TrainCodebook)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_Haversine(benchmark::State& state) {
  Rng rng(6);
  std::vector<GeoPoint> pts;
  for (int i = 0; i < 1024; ++i)
    pts.push_back(make_point(rng.uniform01() * 170.0 - 85.0,
                             rng.uniform01() * 360.0 - 180.0));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        haversine_km(pts[i & 1023], pts[(i + 511) & 1023]));
    ++i;
  }
}
BENCHMARK(BM_Haversine);

void BM_GridSplit(benchmark::State& state) {
  const std::size_t n = state.range(0);
  Rng rng(7);
  std::vector<GeoPoint> pts;
  for (std::size_t i = 0; i < n; ++i)
    pts.push_back(make_point(50.0 + rng.uniform01(), 13.0 + rng.uniform01()));
  SplitConfig sc;
  sc.seed = 8;
  for (auto _ : state)
    benchmark::DoNotOptimize(grid_split(pts, sc));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_GridSplit)->Arg(10000)->Arg(100000);

void BM_TrainSvm(benchmark::State& state) {
  const std::size_t per_class = state.range(0), dim = 64;
  Rng rng(9);
  auto blob = [&](double shift) {
    std::vector<std::vector<float>> out;
    for (std::size_t i = 0; i < per_class; ++i) {
      std::vector<float> x(dim);
      for (float& v : x) v = static_cast<float>(rng.normal() + shift);
      out.push_back(std::move(x));
    }
    return out;
  };
  auto pos = blob(0.25), neg = blob(-0.25);
  TrainConfig cfg;
  cfg.epochs = 100;
  for (auto _ : state)
    benchmark::DoNotOptimize(train_svm(pos, neg, cfg));
  state.SetItemsProcessed(state.iterations() * 2 * per_class);
}
BENCHMARK(BM_TrainSvm)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
