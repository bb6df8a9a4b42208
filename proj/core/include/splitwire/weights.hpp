// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors
//
// Named parameter tensors and the on-disk weight container.
//
// Container layout (all integers little-endian):
//   "SWWT" | version u16 | manifest length u32 | manifest | blob
// The manifest is a UTF-8 JSON array of
//   {"name", "dtype": "f32", "shape": [...], "offset", "byte_length"}
// in blob order; offsets are relative to the blob start and entries are
// contiguous. The blob holds little-endian binary32 values.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "splitwire/model_graph.hpp"
#include "splitwire/tensor.hpp"

namespace splitwire {

inline constexpr std::uint16_t kWeightFormatVersion = 1;

class WeightStore {
 public:
  // Throws on a duplicate name.
  void add(std::string name, WeightTensor tensor);

  const WeightTensor* find(std::string_view name) const noexcept;
  // Throws naming `name` when absent.
  const WeightTensor& at(std::string_view name) const;

  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<std::pair<std::string, WeightTensor>>& entries() const noexcept {
    return entries_;
  }

  // Content hash over names, shapes and values in insertion order.
  // Independent of manifest formatting.
  std::uint64_t fingerprint() const;

  friend bool operator==(const WeightStore& a, const WeightStore& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<std::pair<std::string, WeightTensor>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

WeightStore load_weights(std::span<const std::byte> container);
std::vector<std::byte> export_weights(const WeightStore& store);

WeightStore read_weights_file(const std::filesystem::path& path);
void write_weights_file(const WeightStore& store, const std::filesystem::path& path);

struct WeightRequirement {
  std::string name;
  std::vector<std::int64_t> shape;
  LayerKind owner = LayerKind::kIdentity;
};

// Every parameter tensor the graph reads, in layer order.
std::vector<WeightRequirement> required_weights(const ModelGraph& graph);

// Checks that every requirement resolves to one tensor of the right shape;
// throws naming the first bad layer.
void validate_weights(const ModelGraph& graph, const WeightStore& store);

// Test fixture: conv/linear weights uniform in +-1/sqrt(fan_in), batch-norm
// statistics drawn near identity. Each tensor is seeded from (seed, name),
// so a tensor's values do not depend on which other layers exist.
WeightStore random_weights(const ModelGraph& graph, std::uint64_t seed);

}  // namespace splitwire
