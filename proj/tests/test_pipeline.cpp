// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors

#include <gtest/gtest.h>

#include "splitwire/error.hpp"
#include "splitwire/pipeline.hpp"
#include "splitwire/runtime.hpp"

namespace splitwire {
namespace {

TEST(Payload, F32RoundTrip) {
  const std::vector<float> z{0.5f, -2.0f, 3.25f};
  const auto p = encode_payload(z, PayloadDtype::kF32, SplitPoint::kSP3);
  EXPECT_EQ(p.size(), 12u);
  EXPECT_EQ(decode_payload(p, 3, PayloadDtype::kF32, SplitPoint::kSP3), z);
}

TEST(Payload, U8CarriesSideInfo) {
  const std::vector<float> z{0.0f, 1.0f, -1.0f, 0.25f};
  const auto p = encode_payload(z, PayloadDtype::kU8, SplitPoint::kSP2);
  EXPECT_EQ(p.size(), 4u + 8u);
  EXPECT_EQ(p.size(), expected_payload_bytes(4, PayloadDtype::kU8, SplitPoint::kSP2));
  const auto back = decode_payload(p, 4, PayloadDtype::kU8, SplitPoint::kSP2);
  for (std::size_t i = 0; i < z.size(); ++i) EXPECT_NEAR(back[i], z[i], 2.0 / 255.0);
}

TEST(Payload, LabelOnly) {
  const auto p = encode_payload(std::vector<float>{57.0f}, PayloadDtype::kF32, SplitPoint::kSP6);
  EXPECT_EQ(p.size(), 2u);
  EXPECT_EQ(decode_payload(p, 1, PayloadDtype::kU8, SplitPoint::kSP6), std::vector<float>{57.0f});
  EXPECT_THROW(encode_payload(std::vector<float>{1.5f}, PayloadDtype::kF32, SplitPoint::kSP6),
               Error);
}

TEST(Payload, LengthMismatchIsProtocolError) {
  const std::vector<std::byte> p(10);
  try {
    decode_payload(p, 3, PayloadDtype::kF32, SplitPoint::kSP2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kProtocol);
  }
}

class SimulateTest : public ::testing::Test {
 protected:
  static SplitModel make(SplitPoint sp, std::int64_t n_c) {
    SplitConfig c;
    c.hidden_channels = 32;
    return apply_split(build_resnet(18, ResNetVariant::kCifar, 10, 16), sp, n_c, c);
  }
};

TEST_F(SimulateTest, SeededRunsAreReproducible) {
  const SplitModel m = make(SplitPoint::kSP2, 64);
  const WeightStore w = random_weights(m.joined(), 4);
  const Tensor x = random_input(m.vanilla.input_shape(), 4);
  ChannelProfile ch;
  ch.snr_db = 0.0;
  const auto a = simulate(m, w, x, ch, 10);
  const auto b = simulate(m, w, x, ch, 10);
  EXPECT_EQ(a.rx.z_hat, b.rx.z_hat);
  EXPECT_EQ(a.rx.logits, b.rx.logits);
  EXPECT_NE(simulate(m, w, x, ch, 11).rx.z_hat, a.rx.z_hat);
  EXPECT_TRUE(is_normalized(a.tx.z));
  EXPECT_EQ(a.rx.z_received, a.tx.z);
}

TEST_F(SimulateTest, NoiselessMatchesJoinedGraph) {
  for (auto sp : {SplitPoint::kSP0, SplitPoint::kSP1, SplitPoint::kSP4, SplitPoint::kSP6}) {
    const std::int64_t n_c = sp == SplitPoint::kSP0 ? 3 * 16 * 16 : sp == SplitPoint::kSP6 ? 1 : 64;
    const SplitModel m = make(sp, n_c);
    const WeightStore w = random_weights(m.joined(), 5);
    const Tensor x = random_input(m.vanilla.input_shape(), 6);
    ChannelProfile ch;
    ch.noiseless = true;
    const auto r = simulate(m, w, x, ch, 1);
    const Tensor ref = run_graph(m.joined(), w, x);
    if (sp == SplitPoint::kSP6) {
      EXPECT_EQ(r.rx.label, static_cast<std::int64_t>(ref.data()[0]));
      EXPECT_TRUE(r.rx.logits.empty());
    } else {
      EXPECT_EQ(r.rx.logits, std::vector<float>(ref.data().begin(), ref.data().end()))
          << to_string(sp);
    }
  }
}

TEST_F(SimulateTest, LabelIsNeverCorrupted) {
  const SplitModel m = make(SplitPoint::kSP6, 1);
  const WeightStore w = random_weights(m.joined(), 5);
  const Tensor x = random_input(m.vanilla.input_shape(), 6);
  ChannelProfile loud;
  loud.snr_db = -30.0;
  const auto r = simulate(m, w, x, loud, 3);
  EXPECT_EQ(r.rx.z_hat, r.rx.z_received);
  EXPECT_EQ(r.rx.label, static_cast<std::int64_t>(r.tx.z[0]));
}

TEST_F(SimulateTest, RawImageIsNoisedAtSplitZero) {
  const SplitModel m = make(SplitPoint::kSP0, 3 * 16 * 16);
  const WeightStore w = random_weights(m.joined(), 5);
  const Tensor x = random_input(m.vanilla.input_shape(), 6);
  ChannelProfile ch;
  const auto r = simulate(m, w, x, ch, 3);
  EXPECT_EQ(r.rx.z_received, std::vector<float>(x.data().begin(), x.data().end()));
  EXPECT_NE(r.rx.z_hat, r.rx.z_received);
}

TEST_F(SimulateTest, UnnormalizedPayloadRejected) {
  const SplitModel m = make(SplitPoint::kSP2, 64);
  const WeightStore w = random_weights(m.joined(), 4);
  std::vector<float> z(64, 2.0f);
  const auto p = encode_payload(z, PayloadDtype::kF32, SplitPoint::kSP2);
  EXPECT_THROW(receive(m, w, p, PayloadDtype::kF32, 0.0, 1), Error);
  z.assign(64, 1.0f);
  EXPECT_NO_THROW(receive(m, w, encode_payload(z, PayloadDtype::kF32, SplitPoint::kSP2),
                          PayloadDtype::kF32, 0.0, 1));
}

TEST(RandomInput, DeterministicPerSeed) {
  const TensorShape s{3, 4, 4};
  EXPECT_EQ(random_input(s, 1), random_input(s, 1));
  EXPECT_NE(random_input(s, 1), random_input(s, 2));
  EXPECT_NE(entropy_seed(), 0u);
}

}  // namespace
}  // namespace splitwire
