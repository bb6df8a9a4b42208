// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors
//
// Feature-level AWGN channel: noise level from SNR, power normalization of
// the transmitted vector, additive Gaussian noise, 8-bit affine payload
// quantization and payload size accounting.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "splitwire/model_graph.hpp"

namespace splitwire {

enum class PayloadDtype : std::uint8_t { kF32 = 0, kU8 = 1 };

std::string_view to_string(PayloadDtype dtype);
std::optional<PayloadDtype> parse_dtype(std::string_view text);

struct ChannelProfile {
  double snr_db = 5.0;
  double rate_bps = 1e6;  // R, bits per second
  PayloadDtype dtype = PayloadDtype::kF32;
  // No noise at all regardless of snr_db (an "infinite SNR" link).
  bool noiseless = false;

  void validate() const;  // rate_bps > 0 and finite
};

enum class FeatureState { kRaw, kNormalized, kNoisy };

struct FeatureVector {
  std::vector<float> values;
  FeatureState state = FeatureState::kRaw;

  std::int64_t n_c() const noexcept { return static_cast<std::int64_t>(values.size()); }
};

// sigma = 1 / sqrt(10^(snr_db / 10)).
double sigma_from_snr(double snr_db);
double sigma_for(const ChannelProfile& channel);

// Rescales to l2 norm sqrt(n_c), i.e. unit mean power per element.
// Throws "degenerate feature" on a zero (or non-finite) vector.
void normalize_and_scale_inplace(std::span<float> z);
FeatureVector normalize_and_scale(FeatureVector z);

double l2_norm(std::span<const float> z) noexcept;

// Whether `z` looks like the output of normalize_and_scale: its norm is
// within `tolerance` (relative) of sqrt(n_c).
bool is_normalized(std::span<const float> z, double tolerance = 1e-4) noexcept;

// z_i + sigma * n_i, with n_i the i-th standard normal of the counter-based
// generator keyed by `seed`. sigma == 0 leaves z untouched.
void awgn_inplace(std::span<float> z, double sigma, std::uint64_t seed);
FeatureVector awgn(FeatureVector z, double sigma, std::uint64_t seed);

struct Quantized {
  std::vector<std::uint8_t> codes;
  float scale = 0.0f;
  std::int32_t zero_point = 0;

  friend bool operator==(const Quantized&, const Quantized&) = default;
};

// value ~= (code - zero_point) * scale over [min(z), max(z)]; constant
// vectors reconstruct exactly.
Quantized quantize(std::span<const float> z);
std::vector<float> dequantize(const Quantized& q);
// Width of one quantization bin for `z` (0 for a constant vector).
double bin_width(std::span<const float> z) noexcept;

inline constexpr std::int64_t kQuantSideInfoBits = 64;  // f32 scale + i32 zero point
inline constexpr std::int64_t kLabelBits = 16;

// Semantic payload size in bits: 32*n_c for f32, 8*n_c + 64 for u8. SP-6
// carries a single 16-bit class index whatever the dtype. At SP-0 n_c is
// the image element count.
std::int64_t payload_bits(std::int64_t n_c, PayloadDtype dtype, SplitPoint split);

}  // namespace splitwire
