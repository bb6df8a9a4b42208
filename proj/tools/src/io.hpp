// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "splitwire/tensor.hpp"

namespace splitwire::cli {

// Per-channel normalization applied to decoded images (CIFAR-100 training
// statistics).
inline constexpr float kImageMean[3] = {0.5071f, 0.4865f, 0.4409f};
inline constexpr float kImageStd[3] = {0.2673f, 0.2564f, 0.2762f};

// RGB PNG (any bit depth / palette / alpha) decoded, bilinearly resized to
// `size` x `size` and normalized.
Tensor load_png(const std::filesystem::path& path, std::int64_t size);

// Raw little-endian f32 CHW tensor whose length must equal shape.elements().
Tensor load_raw(const std::filesystem::path& path, const TensorShape& shape);

// Picks the loader from the extension (.png, anything else raw).
Tensor load_input(const std::filesystem::path& path, const TensorShape& shape);

Tensor normalize_rgb8(const std::uint8_t* rgb, std::int64_t height, std::int64_t width,
                      std::int64_t size);

struct LabeledImage {
  Tensor image;
  std::int64_t label = 0;
};

// CIFAR-100 binary records: coarse label, fine label, 3072 bytes of CHW
// pixels. Reads at most `limit` records (0 reads all).
std::vector<LabeledImage> read_cifar100_bin(const std::filesystem::path& path,
                                            std::size_t limit);

// Writes bytes atomically enough for our purposes and returns the FNV-1a
// hash of the content.
std::uint64_t write_file(const std::filesystem::path& path, const std::string& content);

// Reproducibility record: configuration echo plus a hash of every output.
class RunManifest {
 public:
  explicit RunManifest(std::string command);

  nlohmann::json& config() { return config_; }
  void add_output(const std::filesystem::path& path, std::uint64_t hash, std::size_t bytes);
  // Writes `content` under `dir` and records it.
  void write_output(const std::filesystem::path& dir, const std::string& name,
                    const std::string& content);
  // Records a file whose content is not reproducible (timings); no hash.
  void add_volatile_output(const std::filesystem::path& path);
  void save(const std::filesystem::path& dir) const;

 private:
  std::string command_;
  nlohmann::json config_ = nlohmann::json::object();
  nlohmann::json outputs_ = nlohmann::json::array();
};

}  // namespace splitwire::cli
