#include <benchmark/benchmark.h>

#include <random>

#include "oodzoo/ensemble.hpp"
#include "oodzoo/pvalue.hpp"
#include "oodzoo/scores.hpp"
#include "oodzoo/sim.hpp"

using namespace oodzoo;

namespace {

FeatureMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<float> nd;
  std::vector<float> v(rows * cols);
  for (auto& x : v) x = nd(gen);
  return FeatureMatrix(rows, cols, std::move(v));
}

void BM_KnnScore(benchmark::State& state) {
  const auto bank = random_matrix(static_cast<std::size_t>(state.range(0)), 64, 1);
  const auto queries = random_matrix(64, 64, 2);
  const KnnIndex index(bank, true);
  std::vector<double> scratch;
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.score(queries.row(i++ % queries.rows()), 50, scratch));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KnnScore)->Arg(1000)->Arg(10000)->Arg(50000);

void BM_BhDecide(benchmark::State& state) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u;
  std::vector<double> p(static_cast<std::size_t>(state.range(0)));
  for (auto& x : p) x = u(gen);
  const EnsembleConfig cfg{Scheme::bh, 0.95};
  for (auto _ : state) benchmark::DoNotOptimize(bh_decide(p, cfg));
}
BENCHMARK(BM_BhDecide)->Arg(7)->Arg(100)->Arg(1000);

void BM_EmpiricalPValue(benchmark::State& state) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> nd;
  std::vector<double> ref(static_cast<std::size_t>(state.range(0)));
  for (auto& x : ref) x = nd(gen);
  const auto cdf = build_cdf(ref);
  std::vector<double> probes(1024);
  for (auto& x : probes) x = nd(gen);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(empirical_pvalue(cdf, probes[i++ & 1023]));
}
BENCHMARK(BM_EmpiricalPValue)->Arg(10000)->Arg(1000000);

void BM_IdUniformTrials(benchmark::State& state) {
  IdUniformSimConfig cfg;
  cfg.m = static_cast<std::size_t>(state.range(0));
  cfg.trials = 100000;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_id_uniform(cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.trials));
}
BENCHMARK(BM_IdUniformTrials)->Arg(7)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
