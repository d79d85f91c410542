#include <benchmark/benchmark.h>

#include "expgnn/datasets.hpp"
#include "expgnn/graph.hpp"
#include "expgnn/ops.hpp"
#include "expgnn/oracles.hpp"
#include "expgnn/random.hpp"
#include "expgnn/tape.hpp"

namespace {

using namespace expgnn;

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Tensor t = Tensor::matrix(r, c);
  for (double& v : t.values()) v = 2.0 * uniform01(rng) - 1.0;
  return t;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Tensor a = random_matrix(n, 128, rng), b = random_matrix(128, 128, rng);
  for (auto _ : state) {
    Tape tape;
    benchmark::DoNotOptimize(tape.value(matmul(tape.constant(a), tape.constant(b))));
  }
}
BENCHMARK(BM_Matmul)->Arg(16)->Arg(41)->Arg(64);

void BM_MatmulBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const Tensor a = random_matrix(n, 128, rng), b = random_matrix(128, 128, rng);
  for (auto _ : state) {
    Tape tape;
    const Var x = tape.leaf(a), w = tape.leaf(b);
    benchmark::DoNotOptimize(tape.backward(sum(matmul(x, w))));
  }
}
BENCHMARK(BM_MatmulBackward)->Arg(16)->Arg(64);

void BM_MaskedSoftmax(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  const Tensor x = random_matrix(n, n, rng);
  BoolMatrix mask = BoolMatrix::square(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) mask.set(i, j, bernoulli(rng, 0.3));
  for (auto _ : state) {
    Tape tape;
    benchmark::DoNotOptimize(tape.value(masked_softmax(tape.constant(x), mask)));
  }
}
BENCHMARK(BM_MaskedSoftmax)->Arg(16)->Arg(41)->Arg(64);

void BM_WindowSequence(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(4);
  const AdjMatrix a = adjacency(gen_uniform(n, 2.0 / static_cast<double>(n), false, rng));
  for (auto _ : state) benchmark::DoNotOptimize(window_sequence(a, 4));
}
BENCHMARK(BM_WindowSequence)->Arg(16)->Arg(64)->Arg(256);

void BM_WlRefine(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(5);
  const Graph g = gen_uniform(n, 4.0 / static_cast<double>(n), true, rng);
  for (auto _ : state) benchmark::DoNotOptimize(wl_refine(g));
}
BENCHMARK(BM_WlRefine)->Arg(16)->Arg(64)->Arg(256);

}  // namespace
