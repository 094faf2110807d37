#include <benchmark/benchmark.h>

#include "nid/clnn.hpp"
#include "nid/cluster.hpp"
#include "nid/encoder.hpp"
#include "nid/neighbors.hpp"

namespace {

nid::Matrix random_rows(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  nid::Rng rng(seed);
  nid::Matrix m(n, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  return m;
}

void BM_MineNeighbors(benchmark::State& state) {
  const auto n = state.range(0);
  const nid::Matrix x = nid::normalize_rows(random_rows(n, 128, 1));
  for (auto _ : state) benchmark::DoNotOptimize(nid::mine_neighbors(x, 50));
  state.SetComplexityN(n);
}
BENCHMARK(BM_MineNeighbors)->Arg(500)->Arg(1000)->Arg(2000)->Complexity(benchmark::oNSquared);

void BM_ContrastiveGrad(benchmark::State& state) {
  const auto views = state.range(0);
  const nid::Matrix v = random_rows(views, 128, 2);
  nid::Rng rng(3);
  nid::Adjacency a = nid::Adjacency::Zero(views, views);
  for (Eigen::Index i = 0; i < views; ++i) {
    for (Eigen::Index j = 0; j < views; ++j) {
      if (i != j && ((i ^ 1) == j || rng.uniform() < 0.05)) a(i, j) = 1;
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(nid::contrastive_grad(v, a, 0.07));
}
BENCHMARK(BM_ContrastiveGrad)->Arg(64)->Arg(128)->Arg(256);

void BM_KMeans(benchmark::State& state) {
  const nid::Matrix x = random_rows(state.range(0), 64, 4);
  nid::KMeansOptions options;
  options.restarts = 1;
  for (auto _ : state) benchmark::DoNotOptimize(nid::kmeans(x, 10, 5, options));
}
BENCHMARK(BM_KMeans)->Arg(1000)->Arg(2000);

void BM_EncodeAll(benchmark::State& state) {
  const auto params = nid::init_params({64, 128, 32}, 10, 2000, 6);
  nid::Rng rng(7);
  std::vector<nid::TokenSeq> data(static_cast<std::size_t>(state.range(0)));
  for (auto& s : data) {
    for (int t = 0; t < 8; ++t) s.ids.push_back(static_cast<nid::TokenId>(nid::kFirstWordId + rng.index(1997)));
  }
  for (auto _ : state) benchmark::DoNotOptimize(nid::encode_all(params, data));
}
BENCHMARK(BM_EncodeAll)->Arg(2000);

}  // namespace

BENCHMARK_MAIN();
