// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors

#include "splitwire/runtime.hpp"

#include "splitwire/channel.hpp"
#include "splitwire/error.hpp"
#include "splitwire/kernels.hpp"

namespace splitwire {
namespace {

const WeightTensor& weight(const WeightStore& w, const std::string& name,
                           const std::vector<std::int64_t>& shape) {
  const WeightTensor* t = w.find(name);
  if (t == nullptr) throw Error(ErrorKind::kInvalidArgument, "missing weight '" + name + "'");
  if (t->shape != shape) {
    throw Error(ErrorKind::kShape, "weight '" + name + "' has the wrong shape");
  }
  return *t;
}

Tensor conv(const WeightStore& w, const std::string& name, const Tensor& x, std::int64_t in,
            std::int64_t out, std::int64_t k, std::int64_t stride, std::int64_t pad, bool bias) {
  const WeightTensor& wt = weight(w, name + ".weight", {out, in, k, k});
  std::span<const float> b;
  if (bias) b = weight(w, name + ".bias", {out}).values;
  return kernels::conv2d(x, wt, b, stride, pad);
}

Tensor bn(const WeightStore& w, const std::string& name, const Tensor& x, std::int64_t c) {
  const std::vector<std::int64_t> s{c};
  return kernels::batchnorm_infer(x, weight(w, name + ".weight", s).values,
                                  weight(w, name + ".bias", s).values,
                                  weight(w, name + ".running_mean", s).values,
                                  weight(w, name + ".running_var", s).values, kBatchNormEps);
}

Tensor basic_block_forward(const LayerSpec& l, const WeightStore& w, const Tensor& x) {
  Tensor y = conv(w, l.name + ".conv1", x, l.in_channels, l.out_channels, 3, l.stride, 1, false);
  y = bn(w, l.name + ".bn1", y, l.out_channels);
  kernels::relu_inplace(y);
  y = conv(w, l.name + ".conv2", y, l.out_channels, l.out_channels, 3, 1, 1, false);
  y = bn(w, l.name + ".bn2", y, l.out_channels);
  if (l.projection) {
    Tensor s = conv(w, l.name + ".downsample.0", x, l.in_channels, l.out_channels, 1, l.stride, 0,
                    false);
    s = bn(w, l.name + ".downsample.1", s, l.out_channels);
    kernels::add_inplace(y, s);
  } else {
    kernels::add_inplace(y, x);
  }
  kernels::relu_inplace(y);
  return y;
}

}  // namespace

Tensor run_layer(const LayerSpec& l, const WeightStore& w, Tensor x) {
  switch (l.kind) {
    case LayerKind::kConv:
      return conv(w, l.name, x, l.in_channels, l.out_channels, l.kernel, l.stride, l.padding,
                  l.bias);
    case LayerKind::kConvTranspose: {
      const WeightTensor& wt =
          weight(w, l.name + ".weight", {l.in_channels, l.out_channels, l.kernel, l.kernel});
      std::span<const float> b;
      if (l.bias) b = weight(w, l.name + ".bias", {l.out_channels}).values;
      return kernels::conv_transpose2d(x, wt, b, l.stride, l.padding, l.output_padding);
    }
    case LayerKind::kBatchNorm:
      return bn(w, l.name, x, l.in_channels);
    case LayerKind::kReLU:
      kernels::relu_inplace(x);
      return x;
    case LayerKind::kMaxPool:
      return kernels::max_pool2d(x, l.kernel, l.stride, l.padding);
    case LayerKind::kResidualBasicBlock:
      return basic_block_forward(l, w, x);
    case LayerKind::kGlobalAvgPool:
      return kernels::global_avg_pool(x);
    case LayerKind::kFullyConnected: {
      const WeightTensor& wt = weight(w, l.name + ".weight", {l.out_channels, l.in_channels});
      std::span<const float> b;
      if (l.bias) b = weight(w, l.name + ".bias", {l.out_channels}).values;
      if (static_cast<std::int64_t>(x.size()) != l.in_channels) {
        throw Error(ErrorKind::kShape, "layer '" + l.name + "': input is not a vector of " +
                                           std::to_string(l.in_channels));
      }
      return Tensor({l.out_channels, 1, 1}, kernels::linear(x.data(), wt, b));
    }
    case LayerKind::kFlatten:
      return x.reshaped({x.shape().elements(), 1, 1});
    case LayerKind::kReshape:
      return x.reshaped(l.reshape_to);
    case LayerKind::kNormalizeScale:
      normalize_and_scale_inplace(x.data());
      return x;
    case LayerKind::kArgmax:
      return Tensor({1, 1, 1}, {static_cast<float>(kernels::argmax(x.data()))});
    case LayerKind::kIdentity:
      return x;
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown layer kind");
}

Tensor run_graph(const ModelGraph& graph, const WeightStore& weights, const Tensor& input) {
  if (!graph.inferred()) {
    throw Error(ErrorKind::kInvalidArgument, "graph '" + graph.name() + "' is not shape-inferred");
  }
  if (input.shape() != graph.input_shape()) {
    throw Error(ErrorKind::kShape, "graph '" + graph.name() + "' expects input " +
                                       to_string(graph.input_shape()) + ", got " +
                                       to_string(input.shape()));
  }
  require_finite(input, "graph input");
  Tensor x = input;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const LayerSpec& l = graph.layers()[i];
    try {
      x = run_layer(l, weights, std::move(x));
    } catch (const ShapeError&) {
      throw;
    } catch (const Error& e) {
      throw Error(e.kind(), "layer " + std::to_string(i) + " ('" + l.name + "'): " + e.what());
    }
    if (x.shape() != graph.output_shape(i)) {
      throw ShapeError(i, "produced " + to_string(x.shape()) + ", expected " +
                              to_string(graph.output_shape(i)));
    }
    if (!x.all_finite()) {
      throw Error(ErrorKind::kInvalidArgument,
                  "layer " + std::to_string(i) + " ('" + l.name + "') produced a non-finite value");
    }
  }
  return x;
}

}  // namespace splitwire
