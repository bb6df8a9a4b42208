// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors
//
// Sequential forward pass of a ModelGraph over a WeightStore.

#pragma once

#include "splitwire/model_graph.hpp"
#include "splitwire/tensor.hpp"
#include "splitwire/weights.hpp"

namespace splitwire {

inline constexpr double kBatchNormEps = 1e-5;

// Applies every layer in order. The graph must be shape-inferred and the
// input must match its input shape. Throws naming the layer on a missing or
// misshapen weight and on non-finite activations. Single-threaded and
// bit-reproducible for identical inputs.
Tensor run_graph(const ModelGraph& graph, const WeightStore& weights, const Tensor& input);

// One layer, exposed for tests and benchmarks.
Tensor run_layer(const LayerSpec& layer, const WeightStore& weights, Tensor input);

}  // namespace splitwire
