// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors

#include "splitwire/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "splitwire/error.hpp"

namespace splitwire {

Tensor::Tensor(TensorShape shape)
    : shape_(shape), data_(static_cast<std::size_t>(shape.elements()), 0.0f) {
  if (!shape.valid()) throw Error(ErrorKind::kShape, "invalid tensor shape " + to_string(shape));
}

Tensor::Tensor(TensorShape shape, std::vector<float> data) : shape_(shape), data_(std::move(data)) {
  if (!shape.valid()) throw Error(ErrorKind::kShape, "invalid tensor shape " + to_string(shape));
  if (static_cast<std::int64_t>(data_.size()) != shape.elements()) {
    throw Error(ErrorKind::kShape, "tensor data length " + std::to_string(data_.size()) +
                                       " does not match shape " + to_string(shape));
  }
}

Tensor Tensor::reshaped(TensorShape shape) const { return Tensor(shape, data_); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

void require_finite(const Tensor& t, const char* where) {
  if (!t.all_finite()) {
    throw Error(ErrorKind::kInvalidArgument, std::string("non-finite value in ") + where);
  }
}

std::int64_t WeightTensor::elements() const noexcept {
  return std::accumulate(shape.begin(), shape.end(), std::int64_t{1}, std::multiplies<>());
}

}  // namespace splitwire
