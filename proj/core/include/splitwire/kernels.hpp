// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors
//
// Inference kernels. All dot products accumulate in double; for every output
// element the terms are added input-channel outermost, then kernel row, then
// kernel column, starting from the bias. Reference implementations that use
// the same order reproduce these results exactly.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "splitwire/tensor.hpp"

namespace splitwire::kernels {

// weights: (C_out, C_in, k, k). bias may be empty.
Tensor conv2d(const Tensor& input, const WeightTensor& weights, std::span<const float> bias,
              std::int64_t stride, std::int64_t padding);

// weights: (C_in, C_out, k, k). bias may be empty.
Tensor conv_transpose2d(const Tensor& input, const WeightTensor& weights,
                        std::span<const float> bias, std::int64_t stride, std::int64_t padding,
                        std::int64_t output_padding);

Tensor batchnorm_infer(const Tensor& input, std::span<const float> gamma,
                       std::span<const float> beta, std::span<const float> mean,
                       std::span<const float> var, double eps);

void relu_inplace(Tensor& t) noexcept;

Tensor max_pool2d(const Tensor& input, std::int64_t kernel, std::int64_t stride,
                  std::int64_t padding);

// Row-major accumulation per channel, then division by H*W.
Tensor global_avg_pool(const Tensor& input);

// weights: (out, in); bias: out (or empty).
std::vector<float> linear(std::span<const float> input, const WeightTensor& weights,
                          std::span<const float> bias);

// Index of the largest element; the first one wins ties.
std::int64_t argmax(std::span<const float> values);

void add_inplace(Tensor& target, const Tensor& other);

}  // namespace splitwire::kernels
