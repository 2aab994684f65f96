// Serial reference kernels against their OpenMP counterparts.

#include "mus/kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

constexpr std::size_t kDim = 256;

std::vector<mus::EmbeddingVector> random_units(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<mus::EmbeddingVector> out(n);
  for (auto& v : out) {
    v.components.resize(kDim);
    for (double& x : v.components) x = g(rng);
    v = mus::normalized(v);
  }
  return out;
}

struct ScoreFixture {
  std::vector<mus::EmbeddingVector> vectors;
  std::vector<mus::kernels::ScorePair> pairs;

  explicit ScoreFixture(std::size_t n) : vectors(random_units(n + 1, 1)) {
    for (std::size_t i = 1; i <= n; ++i) pairs.push_back({&vectors[0], &vectors[i]});
  }
};

struct CompositeFixture {
  std::vector<mus::EmbeddingVector> table;
  std::vector<std::vector<std::size_t>> groups;

  explicit CompositeFixture(std::size_t n) : table(random_units(4 * n, 2)) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::size_t> size(1, 12), pick(0, table.size() - 1);
    groups.resize(n);
    for (auto& g : groups) {
      g.resize(size(rng));
      for (auto& i : g) i = pick(rng);
    }
  }
};

void bm_scores_serial(benchmark::State& state) {
  const ScoreFixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mus::kernels::similarity_scores_serial(f.pairs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void bm_scores_parallel(benchmark::State& state) {
  const ScoreFixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mus::kernels::similarity_scores_parallel(f.pairs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = mus::kernels::max_threads();
}

void bm_composites_serial(benchmark::State& state) {
  const CompositeFixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mus::kernels::mean_composites_serial(f.groups, f.table, kDim));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void bm_composites_parallel(benchmark::State& state) {
  const CompositeFixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mus::kernels::mean_composites_parallel(f.groups, f.table, kDim));
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = mus::kernels::max_threads();
}

}  // namespace

BENCHMARK(bm_scores_serial)->RangeMultiplier(8)->Range(64, 32768);
BENCHMARK(bm_scores_parallel)->RangeMultiplier(8)->Range(64, 32768);
BENCHMARK(bm_composites_serial)->RangeMultiplier(8)->Range(64, 32768);
BENCHMARK(bm_composites_parallel)->RangeMultiplier(8)->Range(64, 32768);

BENCHMARK_MAIN();
