// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors

#include "splitwire/random.hpp"

#include <cmath>
#include <numbers>

namespace splitwire::rng {

double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept {
  const std::uint64_t pair = index & ~std::uint64_t{1};
  // u1 in (0, 1] keeps the logarithm finite.
  const double u1 = 1.0 - uniform(seed, stream, pair);
  const double u2 = uniform(seed, stream, pair + 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return (index & 1) ? r * std::sin(theta) : r * std::cos(theta);
}

}  // namespace splitwire::rng
