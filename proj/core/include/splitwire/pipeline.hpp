// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors
//
// Encoder -> payload -> channel -> decoder. Local simulation and the network
// runners call the same transmit/receive halves, so for equal seeds they
// produce bit-identical noisy vectors and labels.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "splitwire/channel.hpp"
#include "splitwire/model_graph.hpp"
#include "splitwire/tensor.hpp"
#include "splitwire/weights.hpp"

namespace splitwire {

// Serialized semantic payload. f32: n_c little-endian floats. u8: scale f32,
// zero point i32, then n_c codes. SP-6: one u16 class index.
std::vector<std::byte> encode_payload(std::span<const float> z, PayloadDtype dtype,
                                      SplitPoint split);
std::vector<float> decode_payload(std::span<const std::byte> payload, std::int64_t n_c,
                                  PayloadDtype dtype, SplitPoint split);
std::size_t expected_payload_bytes(std::int64_t n_c, PayloadDtype dtype, SplitPoint split);

struct TransmitResult {
  std::vector<float> z;  // encoder output (normalized for SP-1..SP-5)
  std::vector<std::byte> payload;
  double t_m_t = 0.0;  // measured wall-clock seconds
};

TransmitResult transmit(const SplitModel& model, const WeightStore& weights, const Tensor& input,
                        PayloadDtype dtype);

struct ReceiveResult {
  std::vector<float> z_received;  // after dequantization, before noise
  std::vector<float> z_hat;       // what the decoder consumed
  std::vector<float> logits;      // empty at SP-6
  std::int64_t label = -1;
  std::uint64_t seed_used = 0;
  double t_m_r = 0.0;
};

// Decodes the payload, checks the power normalization (SP-1..SP-5), adds
// noise at `sigma` keyed by `seed` (0 draws a fresh seed from entropy; SP-6
// is never corrupted), then runs the decoder.
ReceiveResult receive(const SplitModel& model, const WeightStore& weights,
                      std::span<const std::byte> payload, PayloadDtype dtype, double sigma,
                      std::uint64_t seed);

struct SimulationResult {
  TransmitResult tx;
  ReceiveResult rx;
};

SimulationResult simulate(const SplitModel& model, const WeightStore& weights,
                          const Tensor& input, const ChannelProfile& channel, std::uint64_t seed);

// A non-zero seed drawn from std::random_device.
std::uint64_t entropy_seed();

// Seeded N(0,1) input tensor, for runs without a dataset.
Tensor random_input(const TensorShape& shape, std::uint64_t seed);

// Order-sensitive content hash of a float vector.
std::uint64_t digest(std::span<const float> values);

}  // namespace splitwire
