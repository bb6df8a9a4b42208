// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors

#include "splitwire/weights.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "splitwire/error.hpp"
#include "splitwire/hash.hpp"
#include "splitwire/random.hpp"

static_assert(std::endian::native == std::endian::little,
              "weight container I/O assumes a little-endian host");

namespace splitwire {
namespace {

using json = nlohmann::json;

constexpr std::array<char, 4> kMagic{'S', 'W', 'W', 'T'};
constexpr std::size_t kPreamble = 4 + 2 + 4;

[[noreturn]] void format_error(const std::string& what) {
  throw Error(ErrorKind::kFormat, "weight container: " + what);
}

template <typename T>
T read_le(std::span<const std::byte> bytes, std::size_t offset) {
  T v{};
  std::memcpy(&v, bytes.data() + offset, sizeof(T));
  return v;
}

template <typename T>
void append_le(std::vector<std::byte>& out, T value) {
  const auto* p = reinterpret_cast<const std::byte*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

}  // namespace

void WeightStore::add(std::string name, WeightTensor tensor) {
  if (index_.contains(name)) {
    throw Error(ErrorKind::kFormat, "duplicate tensor name '" + name + "'");
  }
  if (static_cast<std::int64_t>(tensor.values.size()) != tensor.elements()) {
    throw Error(ErrorKind::kShape, "tensor '" + name + "' data does not match its shape");
  }
  index_.emplace(name, entries_.size());
  entries_.emplace_back(std::move(name), std::move(tensor));
}

const WeightTensor* WeightStore::find(std::string_view name) const noexcept {
  const auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : &entries_[it->second].second;
}

const WeightTensor& WeightStore::at(std::string_view name) const {
  if (const WeightTensor* t = find(name)) return *t;
  throw Error(ErrorKind::kInvalidArgument, "missing weight '" + std::string(name) + "'");
}

std::uint64_t WeightStore::fingerprint() const {
  Fnv1a64 h;
  for (const auto& [name, t] : entries_) {
    h.update(name);
    h.update_pod(static_cast<std::uint64_t>(t.shape.size()));
    for (std::int64_t d : t.shape) h.update_pod(d);
    h.update(std::as_bytes(std::span(t.values)));
  }
  return h.digest();
}

WeightStore load_weights(std::span<const std::byte> bytes) {
  if (bytes.size() < kPreamble) format_error("truncated preamble");
  if (std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) format_error("bad magic");
  const auto version = read_le<std::uint16_t>(bytes, 4);
  if (version != kWeightFormatVersion) {
    format_error("unsupported version " + std::to_string(version));
  }
  const auto manifest_len = read_le<std::uint32_t>(bytes, 6);
  if (manifest_len > bytes.size() - kPreamble) format_error("truncated manifest");

  const auto* mbegin = reinterpret_cast<const char*>(bytes.data() + kPreamble);
  json manifest;
  try {
    manifest = json::parse(mbegin, mbegin + manifest_len);
  } catch (const json::exception& e) {
    format_error(std::string("malformed manifest: ") + e.what());
  }
  if (!manifest.is_array()) format_error("manifest must be a JSON array");

  const std::span<const std::byte> blob = bytes.subspan(kPreamble + manifest_len);
  WeightStore store;
  std::uint64_t expected_offset = 0;
  for (const auto& entry : manifest) {
    std::string name;
    std::vector<std::int64_t> shape;
    std::uint64_t offset = 0;
    std::uint64_t byte_length = 0;
    try {
      name = entry.at("name").get<std::string>();
      if (entry.at("dtype").get<std::string>() != "f32") {
        format_error("tensor '" + name + "' has unsupported dtype");
      }
      shape = entry.at("shape").get<std::vector<std::int64_t>>();
      offset = entry.at("offset").get<std::uint64_t>();
      byte_length = entry.at("byte_length").get<std::uint64_t>();
    } catch (const json::exception& e) {
      format_error(std::string("malformed manifest entry: ") + e.what());
    }
    std::uint64_t count = 1;
    for (std::int64_t d : shape) {
      if (d < 0) format_error("tensor '" + name + "' has a negative dimension");
      count *= static_cast<std::uint64_t>(d);
    }
    if (byte_length != count * sizeof(float)) {
      format_error("manifest/blob size mismatch for '" + name + "'");
    }
    if (offset != expected_offset) {
      format_error("tensor '" + name + "' is not contiguous with its predecessor");
    }
    if (offset + byte_length > blob.size()) format_error("truncated blob at '" + name + "'");
    WeightTensor t;
    t.shape = std::move(shape);
    t.values.resize(count);
    std::memcpy(t.values.data(), blob.data() + offset, byte_length);
    store.add(std::move(name), std::move(t));
    expected_offset = offset + byte_length;
  }
  if (expected_offset != blob.size()) {
    format_error("manifest/blob size mismatch: " + std::to_string(blob.size() - expected_offset) +
                 " trailing bytes");
  }
  return store;
}

std::vector<std::byte> export_weights(const WeightStore& store) {
  json manifest = json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : store.entries()) {
    const std::uint64_t len = t.values.size() * sizeof(float);
    manifest.push_back(json{{"name", name},
                            {"dtype", "f32"},
                            {"shape", t.shape},
                            {"offset", offset},
                            {"byte_length", len}});
    offset += len;
  }
  const std::string text = manifest.dump();
  std::vector<std::byte> out;
  out.reserve(kPreamble + text.size() + offset);
  for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
  append_le<std::uint16_t>(out, kWeightFormatVersion);
  append_le<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
  const auto* tb = reinterpret_cast<const std::byte*>(text.data());
  out.insert(out.end(), tb, tb + text.size());
  for (const auto& entry : store.entries()) {
    const auto raw = std::as_bytes(std::span(entry.second.values));
    out.insert(out.end(), raw.begin(), raw.end());
  }
  return out;
}

WeightStore read_weights_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open weights file " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_weights(std::as_bytes(std::span(raw)));
}

void write_weights_file(const WeightStore& store, const std::filesystem::path& path) {
  const auto bytes = export_weights(store);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write weights file " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "short write to " + path.string());
}

namespace {

void require_conv(std::vector<WeightRequirement>& out, const std::string& name, std::int64_t a,
                  std::int64_t b, std::int64_t k, bool bias, LayerKind kind) {
  out.push_back({name + ".weight", {a, b, k, k}, kind});
  if (bias) out.push_back({name + ".bias", {kind == LayerKind::kConv ? a : b}, kind});
}

void require_bn(std::vector<WeightRequirement>& out, const std::string& name, std::int64_t c) {
  for (const char* suffix : {".weight", ".bias", ".running_mean", ".running_var"}) {
    out.push_back({name + suffix, {c}, LayerKind::kBatchNorm});
  }
}

}  // namespace

std::vector<WeightRequirement> required_weights(const ModelGraph& graph) {
  std::vector<WeightRequirement> out;
  for (const LayerSpec& l : graph.layers()) {
    switch (l.kind) {
      case LayerKind::kConv:
        require_conv(out, l.name, l.out_channels, l.in_channels, l.kernel, l.bias, l.kind);
        break;
      case LayerKind::kConvTranspose:
        require_conv(out, l.name, l.in_channels, l.out_channels, l.kernel, l.bias, l.kind);
        break;
      case LayerKind::kBatchNorm:
        require_bn(out, l.name, l.in_channels);
        break;
      case LayerKind::kFullyConnected:
        out.push_back({l.name + ".weight", {l.out_channels, l.in_channels}, l.kind});
        if (l.bias) out.push_back({l.name + ".bias", {l.out_channels}, l.kind});
        break;
      case LayerKind::kResidualBasicBlock:
        require_conv(out, l.name + ".conv1", l.out_channels, l.in_channels, 3, false,
                     LayerKind::kConv);
        require_bn(out, l.name + ".bn1", l.out_channels);
        require_conv(out, l.name + ".conv2", l.out_channels, l.out_channels, 3, false,
                     LayerKind::kConv);
        require_bn(out, l.name + ".bn2", l.out_channels);
        if (l.projection) {
          require_conv(out, l.name + ".downsample.0", l.out_channels, l.in_channels, 1, false,
                       LayerKind::kConv);
          require_bn(out, l.name + ".downsample.1", l.out_channels);
        }
        break;
      default:
        break;
    }
  }
  return out;
}

void validate_weights(const ModelGraph& graph, const WeightStore& store) {
  for (const auto& req : required_weights(graph)) {
    const WeightTensor* t = store.find(req.name);
    if (t == nullptr) {
      throw Error(ErrorKind::kInvalidArgument,
                  "graph '" + graph.name() + "': missing weight '" + req.name + "'");
    }
    if (t->shape != req.shape) {
      throw Error(ErrorKind::kShape, "graph '" + graph.name() + "': weight '" + req.name +
                                         "' has the wrong shape");
    }
  }
}

WeightStore random_weights(const ModelGraph& graph, std::uint64_t seed) {
  WeightStore store;
  std::int64_t last_fan_in = 1;
  for (const auto& req : required_weights(graph)) {
    if (store.find(req.name) != nullptr) continue;
    WeightTensor t;
    t.shape = req.shape;
    t.values.resize(static_cast<std::size_t>(t.elements()));
    Fnv1a64 h;
    h.update(req.name);
    const std::uint64_t stream = h.digest();
    const auto u = [&](std::size_t i) { return rng::uniform(seed, stream, i); };

    const bool is_bn = req.owner == LayerKind::kBatchNorm;
    const std::string_view name = req.name;
    const auto ends_with = [&](std::string_view suffix) {
      return name.size() >= suffix.size() && name.substr(name.size() - suffix.size()) == suffix;
    };
    for (std::size_t i = 0; i < t.values.size(); ++i) {
      double v = 0.0;
      if (is_bn && ends_with(".running_var")) {
        v = 0.5 + u(i);
      } else if (is_bn && ends_with(".weight")) {
        v = 0.5 + u(i);
      } else if (is_bn) {
        v = 0.2 * u(i) - 0.1;
      } else {
        // Biases reuse the bound of the weight listed just before them.
        std::int64_t fan_in = last_fan_in;
        if (req.shape.size() == 4) {
          fan_in = (req.owner == LayerKind::kConvTranspose ? req.shape[0] : req.shape[1]) *
                   req.shape[2] * req.shape[3];
        } else if (req.shape.size() == 2) {
          fan_in = req.shape[1];
        }
        last_fan_in = fan_in;
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        v = (2.0 * u(i) - 1.0) * bound;
      }
      t.values[i] = static_cast<float>(v);
    }
    store.add(req.name, std::move(t));
  }
  return store;
}

}  // namespace splitwire
