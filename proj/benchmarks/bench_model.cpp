#include <benchmark/benchmark.h>

#include <vector>

#include "expgnn/datasets.hpp"
#include "expgnn/model.hpp"
#include "expgnn/training.hpp"

namespace {

using namespace expgnn;

void BM_Forward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  ModelConfig cfg;
  Rng rng(1);
  const ModelParams params = ModelParams::initialize(cfg, rng);
  const Graph g = gen_uniform(n, 3.0 / static_cast<double>(n), true, rng);
  for (auto _ : state) benchmark::DoNotOptimize(forward(g, params, cfg, rng, false));
}
BENCHMARK(BM_Forward)->Arg(16)->Arg(41)->Arg(64)->Unit(benchmark::kMillisecond);

// Forward and backward over a batch, without the optimizer update.
void BM_BatchGradients(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  ModelConfig cfg;
  Rng rng(2);
  const ModelParams params = ModelParams::initialize(cfg, rng);
  std::vector<LabeledGraph> graphs;
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < batch; ++i) {
    graphs.push_back({gen_uniform(16, 0.1, true, rng), static_cast<int>(i % 2)});
    seeds.push_back(i);
  }
  for (auto _ : state) benchmark::DoNotOptimize(batch_gradients(params, cfg, graphs, seeds, true));
}
BENCHMARK(BM_BatchGradients)->Arg(1)->Arg(10)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
