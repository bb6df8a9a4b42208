// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors

#include "splitwire/pipeline.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <random>

#include "splitwire/error.hpp"
#include "splitwire/hash.hpp"
#include "splitwire/random.hpp"
#include "splitwire/runtime.hpp"

static_assert(std::endian::native == std::endian::little,
              "payload encoding assumes a little-endian host");

namespace splitwire {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename T>
void put(std::vector<std::byte>& out, T v) {
  const auto* p = reinterpret_cast<const std::byte*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get(std::span<const std::byte> in, std::size_t offset) {
  T v{};
  std::memcpy(&v, in.data() + offset, sizeof(T));
  return v;
}

constexpr std::uint64_t kInputStream = 0x696e707574ULL;

}  // namespace

std::size_t expected_payload_bytes(std::int64_t n_c, PayloadDtype dtype, SplitPoint split) {
  return static_cast<std::size_t>(payload_bits(n_c, dtype, split) / 8);
}

std::vector<std::byte> encode_payload(std::span<const float> z, PayloadDtype dtype,
                                      SplitPoint split) {
  std::vector<std::byte> out;
  if (split == SplitPoint::kSP6) {
    if (z.size() != 1 || z[0] < 0.0f || z[0] > 65535.0f || z[0] != std::floor(z[0])) {
      throw Error(ErrorKind::kInvalidArgument, "SP-6 payload must be one class index");
    }
    put<std::uint16_t>(out, static_cast<std::uint16_t>(z[0]));
    return out;
  }
  if (dtype == PayloadDtype::kF32) {
    const auto raw = std::as_bytes(z);
    out.assign(raw.begin(), raw.end());
    return out;
  }
  const Quantized q = quantize(z);
  out.reserve(8 + q.codes.size());
  put<float>(out, q.scale);
  put<std::int32_t>(out, q.zero_point);
  for (std::uint8_t c : q.codes) out.push_back(static_cast<std::byte>(c));
  return out;
}

std::vector<float> decode_payload(std::span<const std::byte> payload, std::int64_t n_c,
                                  PayloadDtype dtype, SplitPoint split) {
  if (payload.size() != expected_payload_bytes(n_c, dtype, split)) {
    throw Error(ErrorKind::kProtocol, "payload length " + std::to_string(payload.size()) +
                                          " does not match n_c " + std::to_string(n_c) + " (" +
                                          std::string(to_string(dtype)) + ")");
  }
  if (split == SplitPoint::kSP6) return {static_cast<float>(get<std::uint16_t>(payload, 0))};
  std::vector<float> z(static_cast<std::size_t>(n_c));
  if (dtype == PayloadDtype::kF32) {
    std::memcpy(z.data(), payload.data(), payload.size());
  } else {
    Quantized q;
    q.scale = get<float>(payload, 0);
    q.zero_point = get<std::int32_t>(payload, 4);
    q.codes.resize(z.size());
    std::memcpy(q.codes.data(), payload.data() + 8, q.codes.size());
    if (!std::isfinite(q.scale) || q.scale < 0.0f) {
      throw Error(ErrorKind::kProtocol, "invalid quantization scale");
    }
    z = dequantize(q);
  }
  for (float v : z) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kProtocol, "payload contains a non-finite value");
  }
  return z;
}

TransmitResult transmit(const SplitModel& model, const WeightStore& weights, const Tensor& input,
                        PayloadDtype dtype) {
  TransmitResult tx;
  const auto t0 = Clock::now();
  Tensor out = run_graph(model.encoder, weights, input);
  tx.t_m_t = seconds_since(t0);
  tx.z = std::move(out).release();
  tx.payload = encode_payload(tx.z, dtype, model.split);
  return tx;
}

ReceiveResult receive(const SplitModel& model, const WeightStore& weights,
                      std::span<const std::byte> payload, PayloadDtype dtype, double sigma,
                      std::uint64_t seed) {
  ReceiveResult rx;
  rx.z_received = decode_payload(payload, model.n_c, dtype, model.split);
  if (model.has_semantic_payload()) {
    const double tol = 1e-4 + (dtype == PayloadDtype::kU8 ? bin_width(rx.z_received) : 0.0);
    if (!is_normalized(rx.z_received, tol)) {
      throw Error(ErrorKind::kProtocol, "feature vector is not power-normalized");
    }
  }
  rx.seed_used = seed != 0 ? seed : entropy_seed();
  rx.z_hat = rx.z_received;
  if (model.split != SplitPoint::kSP6) awgn_inplace(rx.z_hat, sigma, rx.seed_used);

  const auto t0 = Clock::now();
  Tensor in(model.decoder.input_shape(), rx.z_hat);
  Tensor out = run_graph(model.decoder, weights, in);
  rx.t_m_r = seconds_since(t0);
  if (model.split == SplitPoint::kSP6) {
    rx.label = static_cast<std::int64_t>(out.data()[0]);
  } else {
    rx.logits = std::move(out).release();
    std::size_t best = 0;
    for (std::size_t i = 1; i < rx.logits.size(); ++i) {
      if (rx.logits[i] > rx.logits[best]) best = i;
    }
    rx.label = static_cast<std::int64_t>(best);
  }
  return rx;
}

SimulationResult simulate(const SplitModel& model, const WeightStore& weights,
                          const Tensor& input, const ChannelProfile& channel, std::uint64_t seed) {
  channel.validate();
  SimulationResult r;
  r.tx = transmit(model, weights, input, channel.dtype);
  r.rx = receive(model, weights, r.tx.payload, channel.dtype, sigma_for(channel), seed);
  return r;
}

std::uint64_t entropy_seed() {
  std::random_device rd;
  std::uint64_t s = 0;
  while (s == 0) s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  return s;
}

Tensor random_input(const TensorShape& shape, std::uint64_t seed) {
  std::vector<float> v(static_cast<std::size_t>(shape.elements()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = static_cast<float>(rng::standard_normal(seed, kInputStream, i));
  }
  return Tensor(shape, std::move(v));
}

std::uint64_t digest(std::span<const float> values) { return fnv1a64(std::as_bytes(values)); }

}  // namespace splitwire
