// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors

#include "splitwire/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "splitwire/error.hpp"
#include "splitwire/random.hpp"

namespace splitwire {
namespace {

constexpr std::uint64_t kNoiseStream = 0x4157474e5f7a6861ULL;

}  // namespace

std::string_view to_string(PayloadDtype dtype) {
  return dtype == PayloadDtype::kF32 ? "f32" : "u8";
}

std::optional<PayloadDtype> parse_dtype(std::string_view text) {
  if (text == "f32") return PayloadDtype::kF32;
  if (text == "u8") return PayloadDtype::kU8;
  return std::nullopt;
}

void ChannelProfile::validate() const {
  if (!(rate_bps > 0.0) || !std::isfinite(rate_bps)) {
    throw Error(ErrorKind::kInvalidArgument, "channel rate must be positive and finite");
  }
  if (!noiseless && !std::isfinite(snr_db)) {
    throw Error(ErrorKind::kInvalidArgument, "snr_db must be finite");
  }
}

double sigma_from_snr(double snr_db) { return 1.0 / std::sqrt(std::pow(10.0, snr_db / 10.0)); }

double sigma_for(const ChannelProfile& channel) {
  return channel.noiseless ? 0.0 : sigma_from_snr(channel.snr_db);
}

double l2_norm(std::span<const float> z) noexcept {
  double acc = 0.0;
  for (float v : z) acc += static_cast<double>(v) * v;
  return std::sqrt(acc);
}

void normalize_and_scale_inplace(std::span<float> z) {
  const double norm = l2_norm(z);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(ErrorKind::kInvalidArgument, "degenerate feature: cannot normalize a zero vector");
  }
  const double k = std::sqrt(static_cast<double>(z.size())) / norm;
  for (float& v : z) v = static_cast<float>(v * k);
}

FeatureVector normalize_and_scale(FeatureVector z) {
  normalize_and_scale_inplace(z.values);
  z.state = FeatureState::kNormalized;
  return z;
}

bool is_normalized(std::span<const float> z, double tolerance) noexcept {
  if (z.empty()) return false;
  const double target = std::sqrt(static_cast<double>(z.size()));
  return std::abs(l2_norm(z) - target) <= tolerance * target;
}

void awgn_inplace(std::span<float> z, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorKind::kInvalidArgument, "sigma must be non-negative");
  }
  if (sigma == 0.0) return;
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = static_cast<float>(z[i] + sigma * rng::standard_normal(seed, kNoiseStream, i));
  }
}

FeatureVector awgn(FeatureVector z, double sigma, std::uint64_t seed) {
  if (z.state == FeatureState::kRaw) {
    throw Error(ErrorKind::kInvalidArgument, "awgn expects a normalized feature vector");
  }
  awgn_inplace(z.values, sigma, seed);
  z.state = FeatureState::kNoisy;
  return z;
}

double bin_width(std::span<const float> z) noexcept {
  if (z.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(z.begin(), z.end());
  return (static_cast<double>(*hi) - *lo) / 255.0;
}

Quantized quantize(std::span<const float> z) {
  Quantized q;
  q.codes.resize(z.size());
  if (z.empty()) return q;
  for (float v : z) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kInvalidArgument, "cannot quantize non-finite value");
  }
  const auto [lo_it, hi_it] = std::minmax_element(z.begin(), z.end());
  const float lo = *lo_it;
  const float hi = *hi_it;
  if (lo == hi) {
    // Exact: code 1 with zero point 0 (positive), code 0 with zero point 1
    // (negative); zero maps to scale 0.
    q.scale = std::abs(lo);
    q.zero_point = lo < 0.0f ? 1 : 0;
    std::fill(q.codes.begin(), q.codes.end(), static_cast<std::uint8_t>(lo > 0.0f ? 1 : 0));
    return q;
  }
  q.scale = static_cast<float>((static_cast<double>(hi) - lo) / 255.0);
  const double s = q.scale;
  const double zp = std::nearbyint(-lo / s);
  if (std::abs(zp) > 1e9) {
    throw Error(ErrorKind::kInvalidArgument,
                "value range too narrow relative to its offset for 8-bit quantization");
  }
  q.zero_point = static_cast<std::int32_t>(zp);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double code = std::nearbyint(z[i] / s) + q.zero_point;
    q.codes[i] = static_cast<std::uint8_t>(std::clamp(code, 0.0, 255.0));
  }
  return q;
}

std::vector<float> dequantize(const Quantized& q) {
  std::vector<float> out(q.codes.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>((static_cast<double>(q.codes[i]) - q.zero_point) * q.scale);
  }
  return out;
}

std::int64_t payload_bits(std::int64_t n_c, PayloadDtype dtype, SplitPoint split) {
  if (split == SplitPoint::kSP6) return kLabelBits;
  if (n_c < 0) throw Error(ErrorKind::kInvalidArgument, "n_c must be non-negative");
  return dtype == PayloadDtype::kF32 ? 32 * n_c : 8 * n_c + kQuantSideInfoBits;
}

}  // namespace splitwire
