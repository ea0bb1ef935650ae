// Microbenchmarks for the hot paths: slice appends, range queries against
// the from-scratch and block baselines, and the stitch kernel itself.
//
// Run: ./benchmarks/tucktree_bench [--benchmark_filter=...]

#include <benchmark/benchmark.h>

#include <random>

#include "tucktree/baseline.hpp"
#include "tucktree/linalg.hpp"
#include "tucktree/query.hpp"
#include "tucktree/sst.hpp"

namespace {

using namespace tucktree;

constexpr Index kTimespan = 4096;

const DenseTensor& series() {
  static const DenseTensor data = [] {
    SynthSpec spec;
    spec.shape = {kTimespan, 16, 16};
    spec.true_ranks = {3, 3, 3};
    spec.noise = 0.05;
    spec.seed = 1;
    return generate_synthetic(spec);
  }();
  return data;
}

AlsConfig als_config() {
  AlsConfig als;
  als.ranks = {3, 3, 3};
  return als;
}

const StreamSegmentTree& tree() {
  static const StreamSegmentTree built = [] {
    TreeConfig cfg;
    cfg.nontemporal = {16, 16};
    cfg.ranks = {3, 3, 3};
    cfg.als = als_config();
    StreamSegmentTree t(cfg);
    for (Index i = 0; i < kTimespan; ++i) t.append(temporal_slice(series(), i));
    return t;
  }();
  return built;
}

const BlockIndex& blocks() {
  static const BlockIndex built =
      build_blocks(series(), default_block_size(kTimespan),
                   std::vector<Index>{3, 3, 3}, als_config());
  return built;
}

void BM_Append(benchmark::State& state) {
  const Index warm = state.range(0);
  TreeConfig cfg;
  cfg.nontemporal = {16, 16};
  cfg.ranks = {3, 3, 3};
  cfg.als = als_config();
  StreamSegmentTree t(cfg);
  for (Index i = 0; i < warm; ++i) t.append(temporal_slice(series(), i));
  Index next = warm;
  for (auto _ : state) {
    if (next == kTimespan) {  // rebuild once the prepared data runs out
      state.PauseTiming();
      t = StreamSegmentTree(cfg);
      for (Index i = 0; i < warm; ++i) t.append(temporal_slice(series(), i));
      next = warm;
      state.ResumeTiming();
    }
    t.append(temporal_slice(series(), next++));
  }
}
BENCHMARK(BM_Append)->Arg(64)->Arg(1024)->Arg(3072);

void BM_TreeQuery(benchmark::State& state) {
  const StreamSegmentTree& t = tree();
  const Index len = state.range(0);
  const Index start = (kTimespan - len) / 2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(range_query(t, start, start + len));
  }
}
BENCHMARK(BM_TreeQuery)->Arg(16)->Arg(64)->Arg(256)->Arg(1024)->Arg(4096);

void BM_BruteQuery(benchmark::State& state) {
  const DenseTensor& data = series();
  const Index len = state.range(0);
  const Index start = (kTimespan - len) / 2;
  const AlsConfig als = als_config();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        brute_force_range(data, start, start + len, als.ranks, als));
  }
}
BENCHMARK(BM_BruteQuery)->Arg(16)->Arg(64)->Arg(256)->Arg(1024)->Arg(4096);

void BM_BlockQuery(benchmark::State& state) {
  const BlockIndex& index = blocks();
  const Index len = state.range(0);
  const Index start = (kTimespan - len) / 2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(block_range_query(index, start, start + len));
  }
}
BENCHMARK(BM_BlockQuery)->Arg(16)->Arg(64)->Arg(256)->Arg(1024)->Arg(4096);

void BM_Stitch(benchmark::State& state) {
  const Index parts_count = state.range(0);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  std::vector<TuckerFactors> parts;
  for (Index i = 0; i < parts_count; ++i) {
    TuckerFactors part;
    part.factors.push_back(random_orthonormal(128, 3, rng));
    part.factors.push_back(random_orthonormal(16, 3, rng));
    part.factors.push_back(random_orthonormal(16, 3, rng));
    part.core = DenseTensor(Shape{3, 3, 3});
    for (double& v : part.core.data()) v = normal(rng);
    parts.push_back(std::move(part));
  }
  const AlsConfig als = als_config();
  const std::vector<Index> ranks = {3, 3, 3};
  for (auto _ : state) {
    benchmark::DoNotOptimize(stitch(parts, ranks, als));
  }
}
BENCHMARK(BM_Stitch)->Arg(1)->Arg(2)->Arg(4)->Arg(8);

void BM_Recall(benchmark::State& state) {
  const StreamSegmentTree& t = tree();
  const Index len = state.range(0);
  const Index start = (kTimespan - len) / 2 + 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(recall(t, start, start + len));
  }
}
BENCHMARK(BM_Recall)->Arg(16)->Arg(256)->Arg(4095);

}  // namespace

BENCHMARK_MAIN();
