// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors

#include <benchmark/benchmark.h>

#include "splitwire/kernels.hpp"
#include "splitwire/pipeline.hpp"

using namespace splitwire;

namespace {

WeightTensor filled(std::vector<std::int64_t> shape, std::uint64_t seed) {
  WeightTensor w{std::move(shape), {}};
  w.values = std::move(random_input({w.elements(), 1, 1}, seed)).release();
  return w;
}

// Args: channels, spatial side, stride.
void BM_Conv2d3x3(benchmark::State& state) {
  const std::int64_t c = state.range(0);
  const std::int64_t hw = state.range(1);
  const std::int64_t s = state.range(2);
  const Tensor x = random_input({c, hw, hw}, 1);
  const WeightTensor w = filled({c, c, 3, 3}, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::conv2d(x, w, {}, s, 1));
  }
  const std::int64_t out = (hw + 2 - 3) / s + 1;
  state.counters["MAC/s"] = benchmark::Counter(static_cast<double>(c * c * 9 * out * out),
                                               benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_Conv2d3x3)
    ->Args({64, 32, 1})
    ->Args({128, 16, 1})
    ->Args({256, 8, 1})
    ->Args({512, 4, 1})
    ->Args({128, 32, 2})
    ->Unit(benchmark::kMillisecond);

void BM_ConvTranspose2d(benchmark::State& state) {
  const std::int64_t cin = state.range(0);
  const std::int64_t cout = state.range(1);
  const std::int64_t hw = state.range(2);
  const Tensor x = random_input({cin, hw, hw}, 3);
  const WeightTensor w = filled({cin, cout, 4, 4}, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::conv_transpose2d(x, w, {}, 2, 1, 0));
  }
  state.counters["MAC/s"] = benchmark::Counter(static_cast<double>(cin * cout * 16 * hw * hw),
                                               benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_ConvTranspose2d)->Args({64, 256, 4})->Args({256, 64, 8})->Unit(benchmark::kMillisecond);

void BM_Linear(benchmark::State& state) {
  const std::int64_t in = state.range(0);
  const auto x = std::move(random_input({in, 1, 1}, 5)).release();
  const WeightTensor w = filled({100, in}, 6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::linear(x, w, {}));
  }
}
BENCHMARK(BM_Linear)->Arg(512)->Arg(4096);

}  // namespace
