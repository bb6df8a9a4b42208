// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors

#include <benchmark/benchmark.h>

#include "splitwire/channel.hpp"
#include "splitwire/pipeline.hpp"
#include "splitwire/runtime.hpp"
#include "splitwire/wire.hpp"

using namespace splitwire;

namespace {

void BM_ResNet34Forward(benchmark::State& state) {
  const ModelGraph v = build_resnet(34, ResNetVariant::kCifar, 100);
  const WeightStore w = random_weights(v, 1);
  const Tensor x = random_input(v.input_shape(), 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_graph(v, w, x));
  }
}
BENCHMARK(BM_ResNet34Forward)->Unit(benchmark::kMillisecond);

// Encoder plus decoder at each split, no noise.
void BM_SplitSimulate(benchmark::State& state) {
  const auto sp = static_cast<SplitPoint>(state.range(0));
  const SplitModel m = apply_split(build_resnet(34, ResNetVariant::kCifar, 100), sp, 1024);
  const WeightStore w = random_weights(m.joined(), 1);
  const Tensor x = random_input(m.vanilla.input_shape(), 2);
  ChannelProfile ch;
  ch.noiseless = true;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate(m, w, x, ch, 1));
  }
  state.SetLabel(to_string(sp));
}
BENCHMARK(BM_SplitSimulate)->DenseRange(1, 5)->Unit(benchmark::kMillisecond);

void BM_Awgn(benchmark::State& state) {
  std::vector<float> z(static_cast<std::size_t>(state.range(0)), 1.0f);
  std::uint64_t seed = 1;
  for (auto _ : state) {
    awgn_inplace(z, 0.5, seed++);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Awgn)->Arg(1024)->Arg(65536);

void BM_Quantize(benchmark::State& state) {
  auto z = std::move(random_input({state.range(0), 1, 1}, 3)).release();
  for (auto _ : state) {
    benchmark::DoNotOptimize(dequantize(quantize(z)));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Quantize)->Arg(1024);

void BM_FrameRoundTrip(benchmark::State& state) {
  wire::Frame f;
  f.split_id = 2;
  f.n_c = static_cast<std::uint32_t>(state.range(0));
  f.payload.resize(f.n_c * 4);
  for (auto _ : state) {
    const auto bytes = wire::encode_frame(f);
    benchmark::DoNotOptimize(wire::decode_frame(bytes));
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(f.payload.size()));
}
BENCHMARK(BM_FrameRoundTrip)->Arg(64)->Arg(1024)->Arg(16384);

}  // namespace

BENCHMARK_MAIN();
