// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors
//
// Architecture graphs for basic-block residual classifiers and their
// partitioning into a transmitter-side encoder and a receiver-side decoder.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace splitwire {

struct TensorShape {
  std::int64_t channels = 1;
  std::int64_t height = 1;
  std::int64_t width = 1;

  std::int64_t elements() const noexcept { return channels * height * width; }
  bool is_vector() const noexcept { return height == 1 && width == 1; }
  bool valid() const noexcept { return channels >= 1 && height >= 1 && width >= 1; }

  friend bool operator==(const TensorShape&, const TensorShape&) = default;
};

std::string to_string(const TensorShape& shape);

enum class LayerKind {
  kConv,
  kConvTranspose,
  kBatchNorm,
  kReLU,
  kMaxPool,
  kResidualBasicBlock,
  kGlobalAvgPool,
  kFullyConnected,
  kFlatten,
  kReshape,
  kNormalizeScale,
  kArgmax,
  kIdentity,
};

std::string_view to_string(LayerKind kind);

// One node of a sequential graph. Which fields are meaningful depends on
// `kind`; unused fields stay at their defaults.
struct LayerSpec {
  LayerKind kind = LayerKind::kIdentity;
  // Weight path prefix ("layer2.0", "fc", "compress.conv").
  std::string name;
  // Coarse position in the network: "stem", "conv2_x".."conv5_x", "head",
  // "compress", "decompress", "split".
  std::string stage;

  std::int64_t in_channels = 0;   // Conv/ConvT/Block/BN; in_features for FC
  std::int64_t out_channels = 0;  // Conv/ConvT/Block; out_features for FC
  std::int64_t kernel = 0;
  std::int64_t stride = 1;
  std::int64_t padding = 0;
  std::int64_t output_padding = 0;  // ConvT only
  bool bias = false;
  bool projection = false;  // Block: 1x1 conv + BN on the shortcut
  TensorShape reshape_to{};  // Reshape only

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// Factories for the common layer kinds.
LayerSpec conv_layer(std::string name, std::string stage, std::int64_t in, std::int64_t out,
                     std::int64_t kernel, std::int64_t stride, std::int64_t padding,
                     bool bias = false);
LayerSpec conv_transpose_layer(std::string name, std::string stage, std::int64_t in,
                               std::int64_t out, std::int64_t kernel, std::int64_t stride,
                               std::int64_t padding, std::int64_t output_padding = 0,
                               bool bias = true);
LayerSpec batch_norm_layer(std::string name, std::string stage, std::int64_t channels);
LayerSpec simple_layer(LayerKind kind, std::string name, std::string stage);
LayerSpec basic_block(std::string name, std::string stage, std::int64_t in, std::int64_t out,
                      std::int64_t stride);
LayerSpec fully_connected_layer(std::string name, std::string stage, std::int64_t in,
                                std::int64_t out);
LayerSpec reshape_layer(std::string name, std::string stage, TensorShape target);

// Ordered list of layers plus the per-layer output shapes produced by shape
// inference. Immutable once built.
class ModelGraph {
 public:
  ModelGraph() = default;
  ModelGraph(std::string name, TensorShape input_shape, std::vector<LayerSpec> layers);

  const std::string& name() const noexcept { return name_; }
  const TensorShape& input_shape() const noexcept { return input_shape_; }
  const std::vector<LayerSpec>& layers() const noexcept { return layers_; }
  std::size_t size() const noexcept { return layers_.size(); }

  bool inferred() const noexcept { return shapes_.size() == layers_.size(); }
  // Output shape of layer i; requires inferred().
  const TensorShape& output_shape(std::size_t i) const;
  // Input shape of layer i (the graph input for i == 0).
  const TensorShape& layer_input_shape(std::size_t i) const;
  // Final output shape (the input shape for an empty graph).
  const TensorShape& output_shape() const;

  friend bool operator==(const ModelGraph&, const ModelGraph&) = default;

 private:
  friend ModelGraph infer_shapes(const ModelGraph& graph, const TensorShape& input_shape);

  std::string name_;
  TensorShape input_shape_{};
  std::vector<LayerSpec> layers_;
  std::vector<TensorShape> shapes_;
};

// Annotates every layer with its output shape. Throws ShapeError naming the
// first incompatible layer.
ModelGraph infer_shapes(const ModelGraph& graph, const TensorShape& input_shape);

// Output shape of a single layer given its input; throws ShapeError(index).
TensorShape layer_output_shape(const LayerSpec& layer, const TensorShape& input,
                               std::size_t index = 0);

enum class ResNetVariant { kCifar, kStandard };

std::optional<ResNetVariant> parse_variant(std::string_view text);
std::string_view to_string(ResNetVariant variant);

// ResNet-18/34 with basic blocks. The cifar variant replaces the 7x7/2 stem
// and max-pool with a single 3x3/1 convolution and takes 32x32 inputs; the
// standard variant takes 224x224 inputs. `input_size` overrides the default
// spatial size.
ModelGraph build_resnet(int depth, ResNetVariant variant, std::int64_t num_classes,
                        std::optional<std::int64_t> input_size = std::nullopt);

// Seven layer boundaries: SP-0 before the stem ... SP-6 between the logits
// and the argmax.
enum class SplitPoint : std::uint8_t { kSP0 = 0, kSP1, kSP2, kSP3, kSP4, kSP5, kSP6 };

inline constexpr int kSplitPointCount = 7;

std::string to_string(SplitPoint split);
std::optional<SplitPoint> parse_split_point(std::string_view text);
std::string_view boundary_name(SplitPoint split);
inline int split_index(SplitPoint split) { return static_cast<int>(split); }

// Architecture knobs of the compression (encoder tail) and decompression
// (decoder head) modules.
struct SplitConfig {
  // Number of transposed-convolution stages in the decompression module.
  int decompress_stages = 2;
  // Target spatial side of the latent grid; the actual grid is the largest
  // power-of-two downscale of the boundary that keeps at least this side
  // and divides n_c.
  std::int64_t latent_grid = 4;
  // Width of the hidden activation between the two decompression stages;
  // 0 selects the per-split default.
  std::int64_t hidden_channels = 0;
};

// Default decompression hidden width per split point. Chosen so the FLOP
// split of CIFAR ResNet-34 at n_c = 1024 tracks the reference
// transmitter/receiver proportions.
std::int64_t default_hidden_channels(SplitPoint split);

struct SplitModel {
  ModelGraph encoder;
  ModelGraph decoder;
  ModelGraph vanilla;
  SplitPoint split = SplitPoint::kSP2;
  // Elements of the transmitted vector: the latent size for SP-1..SP-5, the
  // image element count for SP-0 and 1 (a class index) for SP-6.
  std::int64_t n_c = 0;
  int decompress_stages = 2;
  // Latent grid before flattening; equals (n_c,1,1) when the dense fallback
  // is used.
  TensorShape latent_shape{};
  // Backbone activation shape at the boundary.
  TensorShape boundary_shape{};

  bool has_semantic_payload() const noexcept {
    return split != SplitPoint::kSP0 && split != SplitPoint::kSP6;
  }
  // Encoder followed by decoder as one graph (what runs without a channel).
  ModelGraph joined() const;
};

// Layer index (exclusive end of the encoder prefix) of a split boundary.
std::size_t boundary_index(const ModelGraph& vanilla, SplitPoint split);

SplitModel apply_split(const ModelGraph& vanilla, SplitPoint split, std::int64_t n_c,
                       const SplitConfig& config = {});

}  // namespace splitwire
