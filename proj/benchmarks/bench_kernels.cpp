#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "sigscore/metrics.hpp"
#include "sigscore/parallel.hpp"
#include "sigscore/scoring.hpp"
#include "sigscore/sigkernel.hpp"
#include "sigscore/signature.hpp"

using namespace sigscore;

namespace {

DataStream random_path(std::mt19937_64& rng, std::size_t knots, std::size_t dim, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix values(knots, dim);
  for (double& v : values.data()) v = normal(rng);
  std::vector<double> times(knots);
  for (std::size_t k = 0; k < knots; ++k) times[k] = static_cast<double>(k + 1) / static_cast<double>(knots);
  return augment(DataStream(std::move(times), std::move(values)), kScoringAugmentation);
}

void BM_GoursatKernel(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto knots = static_cast<std::size_t>(state.range(0));
  const auto x = random_path(rng, knots, 256, 1.0 / 16.0);
  const auto y = random_path(rng, knots, 256, 1.0 / 16.0);
  SigKernelConfig cfg;
  cfg.dyadic_order = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(goursat_kernel(x, y, cfg));
}
BENCHMARK(BM_GoursatKernel)->Args({16, 0})->Args({16, 1})->Args({16, 2})->Args({32, 1});

void BM_Gram(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<DataStream> paths;
  for (std::size_t i = 0; i < n; ++i) paths.push_back(random_path(rng, 16, 256, 1.0 / 16.0));
  SigKernelConfig cfg;
  cfg.dyadic_order = 1;
  for (auto _ : state) benchmark::DoNotOptimize(gram(paths, cfg).entries);
  state.counters["workers"] = static_cast<double>(worker_count());
}
BENCHMARK(BM_Gram)->Arg(3)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_KernelScore(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::vector<DataStream> members;
  for (int m = 0; m < state.range(0); ++m) members.push_back(random_path(rng, 10, 64, 0.125));
  const auto obs = random_path(rng, 10, 64, 0.125);
  const SigKernelConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(kernel_score(members, obs, cfg));
}
BENCHMARK(BM_KernelScore)->Arg(3)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_StreamSignature(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal(0.0, 0.3);
  Matrix values(6, 4);
  for (double& v : values.data()) v = normal(rng);
  const auto s = DataStream::with_unit_times(std::move(values));
  const auto depth = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(stream_signature(s, depth).level(depth));
}
BENCHMARK(BM_StreamSignature)->Arg(4)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_CrpsEmpirical(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t m = static_cast<std::size_t>(state.range(0));
  const std::size_t t = 20, j = 32, i = 64;
  std::vector<double> f(m * t * j * i), o(t * j * i);
  for (double& v : f) v = normal(rng);
  for (double& v : o) v = normal(rng);
  const LatWeights w(std::vector<double>(j, 1.0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(crps_empirical({m, t, j, i, f}, {t, j, i, o}, w));
  }
}
BENCHMARK(BM_CrpsEmpirical)->Arg(5)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
