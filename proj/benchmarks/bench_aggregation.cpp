#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "spocc/baselines.hpp"
#include "spocc/dendrogram.hpp"
#include "spocc/ensemble.hpp"
#include "spocc/estimation.hpp"
#include "spocc/possibility.hpp"

using namespace spocc;

namespace {

// Truth uniform; classifier k right with probability 0.6 + 0.3 * k / K.
ValidationTable make_table(std::size_t rows, std::size_t k, std::size_t labels,
                           std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Label> any(0, static_cast<Label>(labels - 1));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Label> preds(rows * k), truth(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    truth[i] = any(rng);
    for (std::size_t c = 0; c < k; ++c)
      preds[i * k + c] = u(rng) < 0.6 + 0.3 * static_cast<double>(c) / static_cast<double>(k)
                             ? truth[i]
                             : any(rng);
  }
  return {LabelSpace::numbered(labels), k, std::move(preds), std::move(truth)};
}

std::vector<double> random_probability(std::size_t l, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(l);
  double total = 0.0;
  for (auto& v : p) total += (v = e(rng));
  for (auto& v : p) v /= total;
  return p;
}

void BM_Dpt(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto p = random_probability(static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(dpt(p));
}
BENCHMARK(BM_Dpt)->Arg(2)->Arg(10)->Arg(100);

void BM_TNormCombine(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const std::size_t k = static_cast<std::size_t>(state.range(0));
  std::vector<PossibilityDistribution> dists;
  for (std::size_t i = 0; i < k; ++i) dists.push_back(dpt(random_probability(10, rng)));
  const TNormParam lambda(state.range(1) == 0 ? 1.0 : 5.0);
  for (auto _ : state) benchmark::DoNotOptimize(tnorm_combine(lambda, dists));
}
BENCHMARK(BM_TNormCombine)->Args({4, 0})->Args({4, 1})->Args({32, 0})->Args({32, 1});

void BM_Kappa(benchmark::State& state) {
  const auto t = make_table(static_cast<std::size_t>(state.range(0)), 2, 5);
  for (auto _ : state) benchmark::DoNotOptimize(dependence_kappa(t, 0, 1));
}
BENCHMARK(BM_Kappa)->Arg(1000)->Arg(10000);

void BM_Hac(benchmark::State& state) {
  const auto t = make_table(500, static_cast<std::size_t>(state.range(0)), 3);
  const auto d = build_dissimilarity(t);
  for (auto _ : state) benchmark::DoNotOptimize(hac(d));
}
BENCHMARK(BM_Hac)->Arg(8)->Arg(32);

void BM_TrainSpocc(benchmark::State& state) {
  const auto t = make_table(static_cast<std::size_t>(state.range(0)), 8, 3);
  for (auto _ : state) benchmark::DoNotOptimize(train_spocc(t));
}
BENCHMARK(BM_TrainSpocc)->Arg(200)->Arg(10000);

void BM_TrainAdaSpocc(benchmark::State& state) {
  const auto t = make_table(200, static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(train_adaspocc(t));
}
BENCHMARK(BM_TrainAdaSpocc)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_PredictAdaSpocc(benchmark::State& state) {
  const std::size_t k = static_cast<std::size_t>(state.range(0));
  const auto t = make_table(400, k, 3);
  const auto model = train_adaspocc(t);
  std::mt19937_64 rng(4);
  std::size_t row = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.predict(t.row(row), rng));
    row = (row + 1) % t.rows();
  }
}
BENCHMARK(BM_PredictAdaSpocc)->Arg(4)->Arg(12);

void BM_WeightedVote(benchmark::State& state) {
  const std::size_t k = static_cast<std::size_t>(state.range(0));
  const auto t = make_table(400, k, 3);
  const auto model = train_weighted_vote(t);
  std::mt19937_64 rng(5);
  std::size_t row = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.predict(t.row(row), rng));
    row = (row + 1) % t.rows();
  }
}
BENCHMARK(BM_WeightedVote)->Arg(4)->Arg(12);

void BM_StackingFit(benchmark::State& state) {
  const auto t = make_table(static_cast<std::size_t>(state.range(0)), 6, 3);
  for (auto _ : state) benchmark::DoNotOptimize(stacking_fit(t, 1e-2));
}
BENCHMARK(BM_StackingFit)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
