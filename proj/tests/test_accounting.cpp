// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors

#include <gtest/gtest.h>

#include <numeric>

#include "splitwire/accounting.hpp"
#include "splitwire/model_graph.hpp"

namespace splitwire {
namespace {

// Closed-form MAC oracle for a CIFAR ResNet: every 3x3 conv of a stage
// shares one output size, plus the 1x1 shortcut of stages 3..5.
std::int64_t stage_macs(std::int64_t blocks, std::int64_t in, std::int64_t out, std::int64_t side) {
  const std::int64_t pos = side * side;
  std::int64_t macs = pos * in * out * 9 + pos * out * out * 9;       // first block
  macs += (blocks - 1) * 2 * pos * out * out * 9;                     // the rest
  if (in != out) macs += pos * in * out;                              // projection
  return macs;
}

TEST(FlopCount, CifarResnet34ByStage) {
  const std::int64_t conv1 = 32 * 32 * 64 * 3 * 9;
  EXPECT_EQ(conv1, 1'769'472);
  EXPECT_EQ(stage_macs(3, 64, 64, 32), 226'492'416);
  const std::int64_t total = conv1 + stage_macs(3, 64, 64, 32) + stage_macs(4, 64, 128, 16) +
                             stage_macs(6, 128, 256, 8) + stage_macs(3, 256, 512, 4) +
                             512 * 100;
  const FlopReport f = count_flops(build_resnet(34, ResNetVariant::kCifar, 100));
  EXPECT_EQ(f.f_m_t, total);
  EXPECT_EQ(f.f_m, total);
  EXPECT_EQ(f.f_m_r, 0);
}

TEST(FlopCount, SingleConvMacs) {
  const LayerSpec l = conv_layer("c", "s", 3, 64, 3, 1, 1);
  EXPECT_EQ(layer_macs(l, {3, 32, 32}, {64, 32, 32}), 1'769'472);
  EXPECT_EQ(layer_macs(batch_norm_layer("b", "s", 64), {64, 32, 32}, {64, 32, 32}), 0);
}

TEST(FlopCount, AdditivityAndProportions) {
  const ModelGraph v = build_resnet(34, ResNetVariant::kCifar, 100);
  for (int k = 0; k < kSplitPointCount; ++k) {
    const SplitModel m = apply_split(v, static_cast<SplitPoint>(k), 256);
    const FlopReport f = count_flops(m);
    std::int64_t t = 0;
    std::int64_t r = 0;
    for (const auto& c : f.layers) (c.side == Side::kTransmitter ? t : r) += c.macs;
    EXPECT_EQ(t, f.f_m_t);
    EXPECT_EQ(r, f.f_m_r);
    EXPECT_NEAR(f.proportion_t() + f.proportion_r(), 100.0, 1e-9);

    const ParamReport p = count_params(m);
    EXPECT_EQ(p.params_t + p.params_r, p.params_total);
    EXPECT_EQ(p.params_total, count_params(m.joined()).params_total);
  }
}

TEST(FlopCount, SplitOverheadNeverBelowVanilla) {
  const ModelGraph v = build_resnet(34, ResNetVariant::kCifar, 100);
  for (int k = 1; k <= 5; ++k) {
    for (std::int64_t n_c : {16, 64, 256, 1024}) {
      const FlopReport f = count_flops(apply_split(v, static_cast<SplitPoint>(k), n_c));
      EXPECT_GE(f.f_m_t + f.f_m_r, f.f_m);
    }
  }
}

TEST(FlopCount, StageDifferenceCalibration) {
  const ModelGraph v = build_resnet(34, ResNetVariant::kCifar, 100);
  const auto t = [&](SplitPoint sp) { return count_flops(apply_split(v, sp, 1024)).f_m_t; };
  // SP-1 and SP-2 share the (64,32,32) boundary, so compression cancels.
  EXPECT_EQ(t(SplitPoint::kSP2) - t(SplitPoint::kSP1), 226'492'416);
}

TEST(FlopCount, MonotoneAcrossSplits) {
  const ModelGraph v = build_resnet(34, ResNetVariant::kCifar, 100);
  std::int64_t prev_t = -1;
  std::int64_t prev_r = std::numeric_limits<std::int64_t>::max();
  for (int k = 1; k <= 5; ++k) {
    const FlopReport f = count_flops(apply_split(v, static_cast<SplitPoint>(k), 1024));
    EXPECT_GT(f.f_m_t, prev_t);
    EXPECT_LT(f.f_m_r, prev_r);
    prev_t = f.f_m_t;
    prev_r = f.f_m_r;
  }
}

TEST(Describe, JsonListsEveryLayer) {
  const ModelGraph v = build_resnet(18, ResNetVariant::kCifar, 10);
  const std::string doc = describe_json(v);
  EXPECT_NE(doc.find("\"layer4.1\""), std::string::npos);
  EXPECT_NE(doc.find("\"macs\""), std::string::npos);
  const std::string split = describe_json(apply_split(v, SplitPoint::kSP3, 64));
  EXPECT_NE(split.find("\"receiver\""), std::string::npos);
  EXPECT_NE(split.find("\"compress.conv\""), std::string::npos);
}

}  // namespace
}  // namespace splitwire
