// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "splitwire/model_graph.hpp"

namespace splitwire {

// Dense CHW activation of 32-bit floats (channel, then row, then column).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(TensorShape shape);
  Tensor(TensorShape shape, std::vector<float> data);

  const TensorShape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }
  std::vector<float>&& release() && { return std::move(data_); }

  float& at(std::int64_t c, std::int64_t h, std::int64_t w) noexcept {
    return data_[static_cast<std::size_t>((c * shape_.height + h) * shape_.width + w)];
  }
  float at(std::int64_t c, std::int64_t h, std::int64_t w) const noexcept {
    return data_[static_cast<std::size_t>((c * shape_.height + h) * shape_.width + w)];
  }

  // Same data, different shape; element counts must match.
  Tensor reshaped(TensorShape shape) const;
  bool all_finite() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  TensorShape shape_{};
  std::vector<float> data_;
};

// Throws if any element is NaN or infinite; `where` names the boundary.
void require_finite(const Tensor& t, const char* where);

// Parameter tensor of arbitrary rank (as stored in a weight container).
struct WeightTensor {
  std::vector<std::int64_t> shape;
  std::vector<float> values;

  std::int64_t elements() const noexcept;
  friend bool operator==(const WeightTensor&, const WeightTensor&) = default;
};

}  // namespace splitwire
