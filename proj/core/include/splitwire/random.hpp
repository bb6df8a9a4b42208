// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors
//
// Counter-based random numbers. Every draw is a pure function of
// (seed, stream, index), so results do not depend on the standard library's
// distribution implementations or on call order.

#pragma once

#include <cstdint>

namespace splitwire::rng {

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t bits(std::uint64_t seed, std::uint64_t stream,
                             std::uint64_t index) noexcept {
  return mix64(mix64(seed ^ mix64(stream)) + index);
}

// Uniform double in [0, 1) with 53 random bits.
constexpr double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept {
  return static_cast<double>(bits(seed, stream, index) >> 11) * 0x1.0p-53;
}

// Standard normal by Box-Muller over the pair (2*(i/2), 2*(i/2)+1); even
// indices take the cosine branch, odd ones the sine branch.
double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept;

}  // namespace splitwire::rng
