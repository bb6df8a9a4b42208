// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors
//
// FLOP and parameter accounting.
//
// One FLOP is one multiply-accumulate of a Conv, ConvTranspose or
// FullyConnected layer; batch-norm, activations, residual additions and
// pooling count zero. Transposed convolutions are charged their scatter
// cost, H_in * W_in * C_in * C_out * k^2. Batch-norm layers hold four
// parameters per channel (scale, shift, running mean, running variance).

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "splitwire/model_graph.hpp"

namespace splitwire {

enum class Side { kTransmitter, kReceiver };

struct LayerCost {
  Side side = Side::kTransmitter;
  std::size_t index = 0;  // index within its side's graph
  std::string name;
  LayerKind kind = LayerKind::kIdentity;
  std::string stage;
  TensorShape output{};
  std::int64_t macs = 0;
  std::int64_t params = 0;
};

struct FlopReport {
  std::int64_t f_m_t = 0;  // encoder (transmitter)
  std::int64_t f_m_r = 0;  // decoder (receiver)
  std::int64_t f_m = 0;    // unsplit vanilla model
  std::vector<LayerCost> layers;

  std::int64_t total() const noexcept { return f_m_t + f_m_r; }
  double proportion_t() const noexcept;  // percent of f_m_t + f_m_r
  double proportion_r() const noexcept;
};

struct ParamReport {
  std::int64_t params_t = 0;
  std::int64_t params_r = 0;
  std::int64_t params_total = 0;

  double proportion_t() const noexcept;
  double proportion_r() const noexcept;
};

std::int64_t layer_macs(const LayerSpec& layer, const TensorShape& input, const TensorShape& output);
std::int64_t layer_params(const LayerSpec& layer);

// Per-layer costs of an inferred graph, all attributed to `side`.
std::vector<LayerCost> layer_costs(const ModelGraph& graph, Side side = Side::kTransmitter);

// A plain graph is reported as running entirely on the transmitter.
FlopReport count_flops(const ModelGraph& graph);
FlopReport count_flops(const SplitModel& model);
ParamReport count_params(const ModelGraph& graph);
ParamReport count_params(const SplitModel& model);

// JSON document listing every layer with its output shape, MACs and
// parameters, plus the totals.
std::string describe_json(const ModelGraph& graph);
std::string describe_json(const SplitModel& model);

}  // namespace splitwire
