// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors

#include <gtest/gtest.h>

#include "splitwire/accounting.hpp"
#include "splitwire/error.hpp"
#include "splitwire/model_graph.hpp"

namespace splitwire {
namespace {

std::size_t count_kind(const ModelGraph& g, LayerKind kind) {
  std::size_t n = 0;
  for (const auto& l : g.layers()) n += l.kind == kind;
  return n;
}

const TensorShape& stage_output(const ModelGraph& g, const std::string& stage) {
  std::size_t last = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.layers()[i].stage == stage) last = i;
  }
  return g.output_shape(last);
}

TEST(BuildResnet, CifarStemIsSingle3x3Conv) {
  const ModelGraph g = build_resnet(34, ResNetVariant::kCifar, 100);
  const LayerSpec& first = g.layers().front();
  EXPECT_EQ(first.kind, LayerKind::kConv);
  EXPECT_EQ(first.kernel, 3);
  EXPECT_EQ(first.stride, 1);
  EXPECT_EQ(first.padding, 1);
  EXPECT_EQ(first.out_channels, 64);
  EXPECT_EQ(layer_params(first), 1728);
  EXPECT_EQ(count_kind(g, LayerKind::kMaxPool), 0u);
  EXPECT_EQ(g.output_shape(), (TensorShape{100, 1, 1}));
}

TEST(BuildResnet, StandardStemHas7x7AndMaxPool) {
  const ModelGraph g = build_resnet(34, ResNetVariant::kStandard, 1000);
  EXPECT_EQ(g.layers().front().kernel, 7);
  EXPECT_EQ(g.layers().front().stride, 2);
  EXPECT_EQ(count_kind(g, LayerKind::kMaxPool), 1u);
  EXPECT_EQ(g.input_shape(), (TensorShape{3, 224, 224}));
}

TEST(BuildResnet, BlockCounts) {
  EXPECT_EQ(count_kind(build_resnet(18, ResNetVariant::kCifar, 10), LayerKind::kResidualBasicBlock),
            8u);
  EXPECT_EQ(count_kind(build_resnet(34, ResNetVariant::kCifar, 10), LayerKind::kResidualBasicBlock),
            16u);
}

TEST(BuildResnet, RejectsUnsupportedDepthAndClasses) {
  EXPECT_THROW(build_resnet(50, ResNetVariant::kCifar, 100), Error);
  EXPECT_THROW(build_resnet(34, ResNetVariant::kCifar, 1), Error);
}

TEST(BuildResnet, Deterministic) {
  EXPECT_EQ(build_resnet(34, ResNetVariant::kCifar, 100), build_resnet(34, ResNetVariant::kCifar, 100));
}

// Published torchvision totals count two BN parameters per channel; the
// extra running statistics add 2 * (BN channels). BN channel totals are
// 4800 for depth 18 and 8512 for depth 34.
TEST(ParamCount, MatchesPublishedTotalsPlusRunningStats) {
  EXPECT_EQ(count_params(build_resnet(18, ResNetVariant::kStandard, 1000)).params_total,
            11'689'512 + 2 * 4800);
  EXPECT_EQ(count_params(build_resnet(34, ResNetVariant::kStandard, 1000)).params_total,
            21'797'672 + 2 * 8512);
}

// The cifar variant swaps the 7x7 stem (9408 weights) for a 3x3 one (1728)
// and shrinks the head.
TEST(ParamCount, Cifar18With10Classes) {
  const std::int64_t standard = 11'689'512 + 2 * 4800;
  const std::int64_t expected = standard - 9408 + 1728 - (512 * 1000 + 1000) + (512 * 10 + 10);
  EXPECT_EQ(count_params(build_resnet(18, ResNetVariant::kCifar, 10)).params_total, expected);
}

TEST(InferShapes, StageOutputs) {
  const ModelGraph g = build_resnet(34, ResNetVariant::kCifar, 100);
  EXPECT_EQ(stage_output(g, "stem"), (TensorShape{64, 32, 32}));
  EXPECT_EQ(stage_output(g, "conv2_x"), (TensorShape{64, 32, 32}));
  EXPECT_EQ(stage_output(g, "conv3_x"), (TensorShape{128, 16, 16}));
  EXPECT_EQ(stage_output(g, "conv4_x"), (TensorShape{256, 8, 8}));
  EXPECT_EQ(stage_output(g, "conv5_x"), (TensorShape{512, 4, 4}));
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.layers()[i].kind == LayerKind::kGlobalAvgPool) {
      EXPECT_EQ(g.output_shape(i), (TensorShape{512, 1, 1}));
    }
  }
}

TEST(InferShapes, RejectsIncompatibleLayerWithIndex) {
  ModelGraph g("bad", {3, 8, 8},
               {conv_layer("a", "s", 3, 8, 3, 1, 1), conv_layer("b", "s", 4, 8, 3, 1, 1)});
  try {
    infer_shapes(g, {3, 8, 8});
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_EQ(e.layer_index(), 1u);
  }
}

TEST(InferShapes, RejectsWrongInput) {
  const ModelGraph g = build_resnet(18, ResNetVariant::kCifar, 10);
  EXPECT_THROW(infer_shapes(g, {1, 32, 32}), Error);
}

TEST(InferShapes, ConvTransposeDoublesWithOutputPadding) {
  const LayerSpec l = conv_transpose_layer("t", "s", 4, 4, 3, 2, 1, 1);
  EXPECT_EQ(layer_output_shape(l, {4, 16, 16}), (TensorShape{4, 32, 32}));
}

TEST(SplitPoints, ParseAndFormat) {
  for (int k = 0; k < kSplitPointCount; ++k) {
    const auto sp = static_cast<SplitPoint>(k);
    EXPECT_EQ(parse_split_point(to_string(sp)), sp);
  }
  EXPECT_FALSE(parse_split_point("SP-7").has_value());
  EXPECT_FALSE(parse_split_point("sp2").has_value());
}

TEST(ApplySplit, Sp2At1024) {
  const ModelGraph v = build_resnet(34, ResNetVariant::kCifar, 100);
  const SplitModel m = apply_split(v, SplitPoint::kSP2, 1024);
  EXPECT_EQ(m.encoder.output_shape(), (TensorShape{1024, 1, 1}));
  EXPECT_EQ(m.decoder.input_shape(), (TensorShape{1024, 1, 1}));
  EXPECT_EQ(m.boundary_shape, (TensorShape{64, 32, 32}));
  EXPECT_EQ(m.encoder.layers().back().kind, LayerKind::kNormalizeScale);
  // The decompression tail restores the boundary shape.
  std::size_t last_decompress = 0;
  for (std::size_t i = 0; i < m.decoder.size(); ++i) {
    if (m.decoder.layers()[i].stage == "decompress") last_decompress = i;
  }
  EXPECT_EQ(m.decoder.output_shape(last_decompress), m.boundary_shape);
  EXPECT_EQ(count_kind(m.decoder, LayerKind::kConvTranspose), 2u);
}

TEST(ApplySplit, OneStageUsesSingleTransposedConv) {
  const ModelGraph v = build_resnet(34, ResNetVariant::kCifar, 100);
  SplitConfig c;
  c.decompress_stages = 1;
  const SplitModel m = apply_split(v, SplitPoint::kSP2, 1024, c);
  EXPECT_EQ(count_kind(m.decoder, LayerKind::kConvTranspose), 1u);
}

TEST(ApplySplit, Sp0AndSp6) {
  const ModelGraph v = build_resnet(34, ResNetVariant::kCifar, 100);
  const SplitModel s0 = apply_split(v, SplitPoint::kSP0, 0);
  EXPECT_EQ(s0.encoder.size(), 1u);
  EXPECT_EQ(s0.encoder.layers()[0].kind, LayerKind::kIdentity);
  EXPECT_EQ(s0.decoder.layers(), v.layers());
  EXPECT_EQ(s0.n_c, 3 * 32 * 32);

  const SplitModel s6 = apply_split(v, SplitPoint::kSP6, 0);
  EXPECT_EQ(s6.encoder.layers().back().kind, LayerKind::kArgmax);
  EXPECT_EQ(s6.encoder.output_shape(), (TensorShape{1, 1, 1}));
  EXPECT_EQ(s6.n_c, 1);
  EXPECT_FALSE(s6.has_semantic_payload());
}

TEST(ApplySplit, RejectsExpansion) {
  const ModelGraph v = build_resnet(34, ResNetVariant::kCifar, 100);
  EXPECT_THROW(apply_split(v, SplitPoint::kSP5, 512 * 4 * 4 + 1), Error);
  EXPECT_THROW(apply_split(v, SplitPoint::kSP2, 0), Error);
  SplitConfig c;
  c.decompress_stages = 3;
  EXPECT_THROW(apply_split(v, SplitPoint::kSP2, 64, c), Error);
}

// Property: for every split, power-of-two n_c and stage count, encoder
// and decoder chain back to the vanilla output.
TEST(ApplySplit, ShapeConsistencyAcrossConfigurations) {
  for (int depth : {18, 34}) {
    const ModelGraph v = build_resnet(depth, ResNetVariant::kCifar, 100);
    for (int k = 1; k <= 5; ++k) {
      const auto sp = static_cast<SplitPoint>(k);
      const std::int64_t boundary = v.output_shape(boundary_index(v, sp) - 1).elements();
      for (std::int64_t n_c = 1; n_c <= std::min<std::int64_t>(boundary, 8192); n_c *= 2) {
        for (int stages : {1, 2}) {
          SplitConfig c;
          c.decompress_stages = stages;
          c.hidden_channels = 32;  // keep the sweep cheap
          const SplitModel m = apply_split(v, sp, n_c, c);
          SCOPED_TRACE(to_string(sp) + " n_c=" + std::to_string(n_c));
          EXPECT_EQ(m.encoder.output_shape(), (TensorShape{n_c, 1, 1}));
          EXPECT_EQ(m.decoder.input_shape(), (TensorShape{n_c, 1, 1}));
          EXPECT_EQ(m.decoder.output_shape(), v.output_shape());
          EXPECT_EQ(m.joined().output_shape(), v.output_shape());
        }
      }
    }
  }
}

TEST(ApplySplit, StandardVariantSplits) {
  const ModelGraph v = build_resnet(18, ResNetVariant::kStandard, 1000);
  for (int k = 0; k < kSplitPointCount; ++k) {
    const SplitModel m = apply_split(v, static_cast<SplitPoint>(k), 256);
    EXPECT_EQ(m.joined().output_shape(), (k == 6 ? TensorShape{1, 1, 1} : v.output_shape()));
  }
}

}  // namespace
}  // namespace splitwire
