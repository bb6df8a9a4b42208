// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors

#include "splitwire/model_graph.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "splitwire/error.hpp"

namespace splitwire {

std::string to_string(const TensorShape& shape) {
  return "(" + std::to_string(shape.channels) + "," + std::to_string(shape.height) + "," +
         std::to_string(shape.width) + ")";
}

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv: return "Conv";
    case LayerKind::kConvTranspose: return "ConvTranspose";
    case LayerKind::kBatchNorm: return "BatchNorm";
    case LayerKind::kReLU: return "ReLU";
    case LayerKind::kMaxPool: return "MaxPool";
    case LayerKind::kResidualBasicBlock: return "ResidualBasicBlock";
    case LayerKind::kGlobalAvgPool: return "GlobalAvgPool";
    case LayerKind::kFullyConnected: return "FullyConnected";
    case LayerKind::kFlatten: return "Flatten";
    case LayerKind::kReshape: return "Reshape";
    case LayerKind::kNormalizeScale: return "NormalizeScale";
    case LayerKind::kArgmax: return "Argmax";
    case LayerKind::kIdentity: return "Identity";
  }
  return "Unknown";
}

LayerSpec conv_layer(std::string name, std::string stage, std::int64_t in, std::int64_t out,
                     std::int64_t kernel, std::int64_t stride, std::int64_t padding, bool bias) {
  LayerSpec l;
  l.kind = LayerKind::kConv;
  l.name = std::move(name);
  l.stage = std::move(stage);
  l.in_channels = in;
  l.out_channels = out;
  l.kernel = kernel;
  l.stride = stride;
  l.padding = padding;
  l.bias = bias;
  return l;
}

LayerSpec conv_transpose_layer(std::string name, std::string stage, std::int64_t in,
                               std::int64_t out, std::int64_t kernel, std::int64_t stride,
                               std::int64_t padding, std::int64_t output_padding, bool bias) {
  LayerSpec l = conv_layer(std::move(name), std::move(stage), in, out, kernel, stride, padding,
                           bias);
  l.kind = LayerKind::kConvTranspose;
  l.output_padding = output_padding;
  return l;
}

LayerSpec batch_norm_layer(std::string name, std::string stage, std::int64_t channels) {
  LayerSpec l;
  l.kind = LayerKind::kBatchNorm;
  l.name = std::move(name);
  l.stage = std::move(stage);
  l.in_channels = channels;
  l.out_channels = channels;
  return l;
}

LayerSpec simple_layer(LayerKind kind, std::string name, std::string stage) {
  LayerSpec l;
  l.kind = kind;
  l.name = std::move(name);
  l.stage = std::move(stage);
  return l;
}

LayerSpec basic_block(std::string name, std::string stage, std::int64_t in, std::int64_t out,
                      std::int64_t stride) {
  LayerSpec l;
  l.kind = LayerKind::kResidualBasicBlock;
  l.name = std::move(name);
  l.stage = std::move(stage);
  l.in_channels = in;
  l.out_channels = out;
  l.kernel = 3;
  l.stride = stride;
  l.padding = 1;
  l.projection = stride != 1 || in != out;
  return l;
}

LayerSpec fully_connected_layer(std::string name, std::string stage, std::int64_t in,
                                std::int64_t out) {
  LayerSpec l;
  l.kind = LayerKind::kFullyConnected;
  l.name = std::move(name);
  l.stage = std::move(stage);
  l.in_channels = in;
  l.out_channels = out;
  l.bias = true;
  return l;
}

LayerSpec reshape_layer(std::string name, std::string stage, TensorShape target) {
  LayerSpec l = simple_layer(LayerKind::kReshape, std::move(name), std::move(stage));
  l.reshape_to = target;
  return l;
}

ModelGraph::ModelGraph(std::string name, TensorShape input_shape, std::vector<LayerSpec> layers)
    : name_(std::move(name)), input_shape_(input_shape), layers_(std::move(layers)) {}

const TensorShape& ModelGraph::output_shape(std::size_t i) const {
  if (!inferred()) throw Error(ErrorKind::kShape, "graph '" + name_ + "' has no inferred shapes");
  return shapes_.at(i);
}

const TensorShape& ModelGraph::layer_input_shape(std::size_t i) const {
  return i == 0 ? input_shape_ : output_shape(i - 1);
}

const TensorShape& ModelGraph::output_shape() const {
  if (layers_.empty()) return input_shape_;
  return output_shape(layers_.size() - 1);
}

namespace {

std::int64_t conv_out(std::int64_t size, std::int64_t k, std::int64_t s, std::int64_t p) {
  return (size + 2 * p - k) / s + 1;
}

void check_conv_params(const LayerSpec& l, std::size_t index) {
  if (l.kernel < 1 || l.stride < 1 || l.padding < 0 || l.output_padding < 0) {
    throw ShapeError(index, "invalid kernel/stride/padding on '" + l.name + "'");
  }
}

void check_channels(const LayerSpec& l, const TensorShape& in, std::size_t index) {
  if (in.channels != l.in_channels) {
    throw ShapeError(index, std::string(to_string(l.kind)) + " '" + l.name + "' expects " +
                                std::to_string(l.in_channels) + " input channels, got " +
                                to_string(in));
  }
}

}  // namespace

TensorShape layer_output_shape(const LayerSpec& l, const TensorShape& in, std::size_t index) {
  if (!in.valid()) throw ShapeError(index, "invalid input shape " + to_string(in));
  switch (l.kind) {
    case LayerKind::kConv:
    case LayerKind::kMaxPool: {
      check_conv_params(l, index);
      if (l.kind == LayerKind::kConv) check_channels(l, in, index);
      if (in.height + 2 * l.padding < l.kernel || in.width + 2 * l.padding < l.kernel) {
        throw ShapeError(index, "kernel larger than padded input on '" + l.name + "'");
      }
      const std::int64_t c = l.kind == LayerKind::kConv ? l.out_channels : in.channels;
      return {c, conv_out(in.height, l.kernel, l.stride, l.padding),
              conv_out(in.width, l.kernel, l.stride, l.padding)};
    }
    case LayerKind::kConvTranspose: {
      check_conv_params(l, index);
      check_channels(l, in, index);
      const auto up = [&](std::int64_t size) {
        return (size - 1) * l.stride - 2 * l.padding + l.kernel + l.output_padding;
      };
      TensorShape out{l.out_channels, up(in.height), up(in.width)};
      if (!out.valid()) throw ShapeError(index, "transposed convolution collapses '" + l.name + "'");
      return out;
    }
    case LayerKind::kBatchNorm:
      check_channels(l, in, index);
      return in;
    case LayerKind::kResidualBasicBlock: {
      check_conv_params(l, index);
      check_channels(l, in, index);
      const bool needs_projection = l.stride != 1 || l.in_channels != l.out_channels;
      if (needs_projection && !l.projection) {
        throw ShapeError(index, "block '" + l.name + "' changes shape without a projection");
      }
      return {l.out_channels, conv_out(in.height, 3, l.stride, 1),
              conv_out(in.width, 3, l.stride, 1)};
    }
    case LayerKind::kGlobalAvgPool:
      return {in.channels, 1, 1};
    case LayerKind::kFullyConnected:
      if (!in.is_vector() || in.channels != l.in_channels) {
        throw ShapeError(index, "fully connected '" + l.name + "' expects (" +
                                    std::to_string(l.in_channels) + ",1,1), got " +
                                    to_string(in));
      }
      return {l.out_channels, 1, 1};
    case LayerKind::kFlatten:
      return {in.elements(), 1, 1};
    case LayerKind::kReshape:
      if (l.reshape_to.elements() != in.elements() || !l.reshape_to.valid()) {
        throw ShapeError(index, "cannot reshape " + to_string(in) + " to " +
                                    to_string(l.reshape_to));
      }
      return l.reshape_to;
    case LayerKind::kArgmax:
      return {1, 1, 1};
    case LayerKind::kReLU:
    case LayerKind::kNormalizeScale:
    case LayerKind::kIdentity:
      return in;
  }
  throw ShapeError(index, "unknown layer kind");
}

ModelGraph infer_shapes(const ModelGraph& graph, const TensorShape& input_shape) {
  if (!input_shape.valid()) throw ShapeError(0, "invalid input shape " + to_string(input_shape));
  ModelGraph out(graph.name_, input_shape, graph.layers_);
  out.shapes_.reserve(graph.layers_.size());
  TensorShape current = input_shape;
  for (std::size_t i = 0; i < graph.layers_.size(); ++i) {
    current = layer_output_shape(graph.layers_[i], current, i);
    out.shapes_.push_back(current);
  }
  return out;
}

std::optional<ResNetVariant> parse_variant(std::string_view text) {
  if (text == "cifar") return ResNetVariant::kCifar;
  if (text == "standard") return ResNetVariant::kStandard;
  return std::nullopt;
}

std::string_view to_string(ResNetVariant variant) {
  return variant == ResNetVariant::kCifar ? "cifar" : "standard";
}

ModelGraph build_resnet(int depth, ResNetVariant variant, std::int64_t num_classes,
                        std::optional<std::int64_t> input_size) {
  std::array<int, 4> blocks{};
  if (depth == 18) {
    blocks = {2, 2, 2, 2};
  } else if (depth == 34) {
    blocks = {3, 4, 6, 3};
  } else {
    throw Error(ErrorKind::kInvalidArgument,
                "unsupported ResNet depth " + std::to_string(depth) + " (expected 18 or 34)");
  }
  if (num_classes < 2) {
    throw Error(ErrorKind::kInvalidArgument, "num_classes must be at least 2");
  }

  const bool cifar = variant == ResNetVariant::kCifar;
  const std::int64_t size = input_size.value_or(cifar ? 32 : 224);
  std::vector<LayerSpec> layers;
  if (cifar) {
    layers.push_back(conv_layer("conv1", "stem", 3, 64, 3, 1, 1));
  } else {
    layers.push_back(conv_layer("conv1", "stem", 3, 64, 7, 2, 3));
  }
  layers.push_back(batch_norm_layer("bn1", "stem", 64));
  layers.push_back(simple_layer(LayerKind::kReLU, "relu", "stem"));
  if (!cifar) {
    LayerSpec pool = simple_layer(LayerKind::kMaxPool, "maxpool", "stem");
    pool.kernel = 3;
    pool.stride = 2;
    pool.padding = 1;
    layers.push_back(pool);
  }

  constexpr std::array<std::int64_t, 4> widths{64, 128, 256, 512};
  std::int64_t in = 64;
  for (std::size_t s = 0; s < widths.size(); ++s) {
    const std::string stage = "conv" + std::to_string(s + 2) + "_x";
    for (int b = 0; b < blocks[s]; ++b) {
      const std::int64_t stride = (s > 0 && b == 0) ? 2 : 1;
      layers.push_back(basic_block("layer" + std::to_string(s + 1) + "." + std::to_string(b),
                                   stage, in, widths[s], stride));
      in = widths[s];
    }
  }
  layers.push_back(simple_layer(LayerKind::kGlobalAvgPool, "avgpool", "head"));
  layers.push_back(simple_layer(LayerKind::kFlatten, "flatten", "head"));
  layers.push_back(fully_connected_layer("fc", "head", 512, num_classes));

  const std::string name = "resnet" + std::to_string(depth) + "-" + std::string(to_string(variant));
  return infer_shapes(ModelGraph(name, {3, size, size}, std::move(layers)), {3, size, size});
}

std::string to_string(SplitPoint split) { return "SP-" + std::to_string(split_index(split)); }

std::optional<SplitPoint> parse_split_point(std::string_view text) {
  if (text.size() == 4 && (text.substr(0, 3) == "SP-" || text.substr(0, 3) == "sp-")) {
    const char d = text[3];
    if (d >= '0' && d <= '6') return static_cast<SplitPoint>(d - '0');
  }
  return std::nullopt;
}

std::string_view boundary_name(SplitPoint split) {
  switch (split) {
    case SplitPoint::kSP0: return "input-conv1";
    case SplitPoint::kSP1: return "conv1-conv2_x";
    case SplitPoint::kSP2: return "conv2_x-conv3_x";
    case SplitPoint::kSP3: return "conv3_x-conv4_x";
    case SplitPoint::kSP4: return "conv4_x-conv5_x";
    case SplitPoint::kSP5: return "conv5_x-avgpool";
    case SplitPoint::kSP6: return "logits-argmax";
  }
  return "?";
}

std::int64_t default_hidden_channels(SplitPoint split) {
  switch (split) {
    case SplitPoint::kSP1:
    case SplitPoint::kSP2: return 3456;
    case SplitPoint::kSP3: return 1344;
    case SplitPoint::kSP4: return 512;
    case SplitPoint::kSP5: return 256;
    default: return 0;
  }
}

ModelGraph SplitModel::joined() const {
  std::vector<LayerSpec> layers = encoder.layers();
  layers.insert(layers.end(), decoder.layers().begin(), decoder.layers().end());
  return infer_shapes(ModelGraph(vanilla.name() + "-" + to_string(split) + "-joined",
                                 encoder.input_shape(), std::move(layers)),
                      encoder.input_shape());
}

std::size_t boundary_index(const ModelGraph& vanilla, SplitPoint split) {
  if (split == SplitPoint::kSP0) return 0;
  if (split == SplitPoint::kSP6) return vanilla.size();
  static constexpr std::array<std::string_view, 5> kStageBefore{"", "stem", "conv2_x", "conv3_x",
                                                                "conv4_x"};
  const std::string_view last_stage =
      split == SplitPoint::kSP5 ? std::string_view("conv5_x") : kStageBefore[split_index(split)];
  std::optional<std::size_t> end;
  for (std::size_t i = 0; i < vanilla.size(); ++i) {
    if (vanilla.layers()[i].stage == last_stage) end = i + 1;
  }
  if (!end) {
    throw Error(ErrorKind::kInvalidArgument,
                "graph '" + vanilla.name() + "' has no stage '" + std::string(last_stage) + "'");
  }
  return *end;
}

namespace {

// Transposed convolution that upsamples exactly by `factor`.
LayerSpec upsample_stage(std::string name, std::int64_t in, std::int64_t out, std::int64_t factor) {
  if (factor == 1) return conv_transpose_layer(std::move(name), "decompress", in, out, 3, 1, 1);
  return conv_transpose_layer(std::move(name), "decompress", in, out, 2 * factor, factor,
                              factor / 2);
}

// Spatial downscale of the latent grid, or nullopt when no power-of-two
// downscale yields a grid whose area divides n_c.
std::optional<std::int64_t> pick_downscale(const TensorShape& b, std::int64_t n_c,
                                           std::int64_t grid) {
  std::vector<std::int64_t> scales;
  for (std::int64_t u = 1; u <= b.height && u <= b.width && b.height % u == 0 && b.width % u == 0;
       u *= 2) {
    scales.push_back(u);
  }
  std::vector<std::int64_t> order;
  for (auto it = scales.rbegin(); it != scales.rend(); ++it) {
    if (b.height / *it >= grid && b.width / *it >= grid) order.push_back(*it);
  }
  if (order.empty()) order.push_back(1);
  for (std::int64_t u : scales) {
    if (u > order.front()) order.push_back(u);
  }
  for (std::int64_t u : order) {
    const std::int64_t area = (b.height / u) * (b.width / u);
    if (area <= n_c && n_c % area == 0) return u;
  }
  return std::nullopt;
}

}  // namespace

SplitModel apply_split(const ModelGraph& vanilla_in, SplitPoint split, std::int64_t n_c,
                       const SplitConfig& config) {
  const ModelGraph vanilla =
      vanilla_in.inferred() ? vanilla_in : infer_shapes(vanilla_in, vanilla_in.input_shape());
  if (config.decompress_stages != 1 && config.decompress_stages != 2) {
    throw Error(ErrorKind::kInvalidArgument, "decompress_stages must be 1 or 2");
  }
  const std::string prefix = vanilla.name() + "-" + to_string(split);
  const TensorShape input = vanilla.input_shape();

  SplitModel m;
  m.vanilla = vanilla;
  m.split = split;
  m.decompress_stages = config.decompress_stages;

  if (split == SplitPoint::kSP0) {
    m.n_c = input.elements();
    m.boundary_shape = input;
    m.latent_shape = input;
    m.encoder = infer_shapes(
        ModelGraph(prefix + "-encoder", input,
                   {simple_layer(LayerKind::kIdentity, "transmit", "split")}),
        input);
    m.decoder = ModelGraph(prefix + "-decoder", input, vanilla.layers());
    m.decoder = infer_shapes(m.decoder, input);
    return m;
  }
  if (split == SplitPoint::kSP6) {
    std::vector<LayerSpec> layers = vanilla.layers();
    layers.push_back(simple_layer(LayerKind::kArgmax, "argmax", "split"));
    m.n_c = 1;
    m.boundary_shape = vanilla.output_shape();
    m.latent_shape = {1, 1, 1};
    m.encoder = infer_shapes(ModelGraph(prefix + "-encoder", input, std::move(layers)), input);
    m.decoder = infer_shapes(
        ModelGraph(prefix + "-decoder", {1, 1, 1},
                   {simple_layer(LayerKind::kIdentity, "receive", "split")}),
        {1, 1, 1});
    return m;
  }

  const std::size_t cut = boundary_index(vanilla, split);
  const TensorShape b = vanilla.output_shape(cut - 1);
  if (n_c < 1) throw Error(ErrorKind::kInvalidArgument, "n_c must be positive");
  if (n_c > b.elements()) {
    throw Error(ErrorKind::kInvalidArgument,
                "n_c = " + std::to_string(n_c) + " exceeds the flattened boundary size " +
                    std::to_string(b.elements()) + " at " + to_string(split));
  }
  m.n_c = n_c;
  m.boundary_shape = b;

  std::vector<LayerSpec> enc(vanilla.layers().begin(), vanilla.layers().begin() + cut);
  std::vector<LayerSpec> dec;
  const TensorShape latent_vec{n_c, 1, 1};

  if (const auto u = pick_downscale(b, n_c, config.latent_grid)) {
    const std::int64_t gh = b.height / *u;
    const std::int64_t gw = b.width / *u;
    const std::int64_t cz = n_c / (gh * gw);
    m.latent_shape = {cz, gh, gw};

    if (*u == 1) {
      enc.push_back(conv_layer("compress.conv", "compress", b.channels, cz, 3, 1, 1, true));
    } else if (*u == 2) {
      enc.push_back(conv_layer("compress.conv", "compress", b.channels, cz, 4, 2, 1, true));
    } else {
      enc.push_back(conv_layer("compress.conv", "compress", b.channels, cz, 4, *u, 0, true));
    }

    dec.push_back(reshape_layer("decompress.reshape", "decompress", m.latent_shape));
    if (config.decompress_stages == 2) {
      const std::int64_t hidden =
          config.hidden_channels > 0 ? config.hidden_channels : default_hidden_channels(split);
      const std::int64_t last = std::min<std::int64_t>(*u, 2);
      dec.push_back(upsample_stage("decompress.0", cz, hidden, *u / last));
      dec.push_back(batch_norm_layer("decompress.1", "decompress", hidden));
      dec.push_back(simple_layer(LayerKind::kReLU, "decompress.2", "decompress"));
      dec.push_back(upsample_stage("decompress.3", hidden, b.channels, last));
      dec.push_back(batch_norm_layer("decompress.4", "decompress", b.channels));
      dec.push_back(simple_layer(LayerKind::kReLU, "decompress.5", "decompress"));
    } else {
      dec.push_back(upsample_stage("decompress.0", cz, b.channels, *u));
      dec.push_back(batch_norm_layer("decompress.1", "decompress", b.channels));
      dec.push_back(simple_layer(LayerKind::kReLU, "decompress.2", "decompress"));
    }
    enc.push_back(simple_layer(LayerKind::kFlatten, "compress.flatten", "compress"));
  } else {
    // Boundary grid not divisible into n_c: dense projection both ways.
    m.latent_shape = latent_vec;
    enc.push_back(simple_layer(LayerKind::kFlatten, "compress.flatten", "compress"));
    enc.push_back(fully_connected_layer("compress.fc", "compress", b.elements(), n_c));
    dec.push_back(fully_connected_layer("decompress.fc", "decompress", n_c, b.elements()));
    dec.push_back(reshape_layer("decompress.reshape", "decompress", b));
    dec.push_back(simple_layer(LayerKind::kReLU, "decompress.relu", "decompress"));
  }
  enc.push_back(simple_layer(LayerKind::kNormalizeScale, "compress.normalize", "compress"));
  dec.insert(dec.end(), vanilla.layers().begin() + cut, vanilla.layers().end());

  m.encoder = infer_shapes(ModelGraph(prefix + "-encoder", input, std::move(enc)), input);
  m.decoder = infer_shapes(ModelGraph(prefix + "-decoder", latent_vec, std::move(dec)), latent_vec);
  return m;
}

}  // namespace splitwire
