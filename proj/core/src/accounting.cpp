// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors

#include "splitwire/accounting.hpp"

#include <json.hpp>

#include "splitwire/error.hpp"

namespace splitwire {
namespace {

double percent(std::int64_t part, std::int64_t whole) {
  return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

std::int64_t conv_weights(std::int64_t in, std::int64_t out, std::int64_t k) {
  return in * out * k * k;
}

}  // namespace

double FlopReport::proportion_t() const noexcept { return percent(f_m_t, total()); }
double FlopReport::proportion_r() const noexcept { return percent(f_m_r, total()); }
double ParamReport::proportion_t() const noexcept { return percent(params_t, params_total); }
double ParamReport::proportion_r() const noexcept { return percent(params_r, params_total); }

std::int64_t layer_macs(const LayerSpec& l, const TensorShape& in, const TensorShape& out) {
  switch (l.kind) {
    case LayerKind::kConv:
      return out.height * out.width * conv_weights(l.in_channels, l.out_channels, l.kernel);
    case LayerKind::kConvTranspose:
      return in.height * in.width * conv_weights(l.in_channels, l.out_channels, l.kernel);
    case LayerKind::kFullyConnected:
      return l.in_channels * l.out_channels;
    case LayerKind::kResidualBasicBlock: {
      const std::int64_t positions = out.height * out.width;
      std::int64_t macs = positions * conv_weights(l.in_channels, l.out_channels, 3) +
                          positions * conv_weights(l.out_channels, l.out_channels, 3);
      if (l.projection) macs += positions * l.in_channels * l.out_channels;
      return macs;
    }
    default:
      return 0;
  }
}

std::int64_t layer_params(const LayerSpec& l) {
  switch (l.kind) {
    case LayerKind::kConv:
    case LayerKind::kConvTranspose:
      return conv_weights(l.in_channels, l.out_channels, l.kernel) + (l.bias ? l.out_channels : 0);
    case LayerKind::kFullyConnected:
      return l.in_channels * l.out_channels + (l.bias ? l.out_channels : 0);
    case LayerKind::kBatchNorm:
      return 4 * l.in_channels;
    case LayerKind::kResidualBasicBlock: {
      std::int64_t p = conv_weights(l.in_channels, l.out_channels, 3) + 4 * l.out_channels +
                       conv_weights(l.out_channels, l.out_channels, 3) + 4 * l.out_channels;
      if (l.projection) p += l.in_channels * l.out_channels + 4 * l.out_channels;
      return p;
    }
    default:
      return 0;
  }
}

std::vector<LayerCost> layer_costs(const ModelGraph& graph, Side side) {
  if (!graph.inferred()) {
    throw Error(ErrorKind::kShape, "graph '" + graph.name() + "' needs shape inference first");
  }
  std::vector<LayerCost> costs;
  costs.reserve(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const LayerSpec& l = graph.layers()[i];
    costs.push_back({side, i, l.name, l.kind, l.stage, graph.output_shape(i),
                     layer_macs(l, graph.layer_input_shape(i), graph.output_shape(i)),
                     layer_params(l)});
  }
  return costs;
}

FlopReport count_flops(const ModelGraph& graph) {
  FlopReport r;
  r.layers = layer_costs(graph, Side::kTransmitter);
  for (const auto& c : r.layers) r.f_m_t += c.macs;
  r.f_m = r.f_m_t;
  return r;
}

FlopReport count_flops(const SplitModel& model) {
  FlopReport r;
  r.layers = layer_costs(model.encoder, Side::kTransmitter);
  for (const auto& c : r.layers) r.f_m_t += c.macs;
  for (auto& c : layer_costs(model.decoder, Side::kReceiver)) {
    r.f_m_r += c.macs;
    r.layers.push_back(std::move(c));
  }
  r.f_m = count_flops(model.vanilla).f_m_t;
  return r;
}

ParamReport count_params(const ModelGraph& graph) {
  ParamReport r;
  for (const auto& l : graph.layers()) r.params_t += layer_params(l);
  r.params_total = r.params_t;
  return r;
}

ParamReport count_params(const SplitModel& model) {
  ParamReport r;
  r.params_t = count_params(model.encoder).params_t;
  r.params_r = count_params(model.decoder).params_t;
  r.params_total = r.params_t + r.params_r;
  return r;
}

namespace {

nlohmann::json layers_json(const std::vector<LayerCost>& costs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : costs) {
    arr.push_back({{"side", c.side == Side::kTransmitter ? "transmitter" : "receiver"},
                   {"index", c.index},
                   {"name", c.name},
                   {"kind", std::string(to_string(c.kind))},
                   {"stage", c.stage},
                   {"output", {c.output.channels, c.output.height, c.output.width}},
                   {"macs", c.macs},
                   {"params", c.params}});
  }
  return arr;
}

nlohmann::json shape_json(const TensorShape& s) { return {s.channels, s.height, s.width}; }

}  // namespace

std::string describe_json(const ModelGraph& graph) {
  const FlopReport f = count_flops(graph);
  const ParamReport p = count_params(graph);
  nlohmann::json doc{{"name", graph.name()},
                     {"input", shape_json(graph.input_shape())},
                     {"output", shape_json(graph.output_shape())},
                     {"macs", f.f_m_t},
                     {"params", p.params_total},
                     {"layers", layers_json(f.layers)}};
  return doc.dump(2);
}

std::string describe_json(const SplitModel& model) {
  const FlopReport f = count_flops(model);
  const ParamReport p = count_params(model);
  nlohmann::json doc{{"name", model.vanilla.name()},
                     {"split", to_string(model.split)},
                     {"n_c", model.n_c},
                     {"decompress_stages", model.decompress_stages},
                     {"boundary", shape_json(model.boundary_shape)},
                     {"latent", shape_json(model.latent_shape)},
                     {"f_m_t", f.f_m_t},
                     {"f_m_r", f.f_m_r},
                     {"f_m", f.f_m},
                     {"params_t", p.params_t},
                     {"params_r", p.params_r},
                     {"layers", layers_json(f.layers)}};
  return doc.dump(2);
}

}  // namespace splitwire
