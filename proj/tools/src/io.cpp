// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors

#include "io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>

#include "splitwire/error.hpp"
#include "splitwire/hash.hpp"

#ifndef SPLITWIRE_VERSION
#define SPLITWIRE_VERSION "0.0.0"
#endif

namespace splitwire::cli {

Tensor normalize_rgb8(const std::uint8_t* rgb, std::int64_t height, std::int64_t width,
                      std::int64_t size) {
  Tensor out({3, size, size});
  // Bilinear, pixel centers aligned (half-pixel offsets).
  const double sy = static_cast<double>(height) / size;
  const double sx = static_cast<double>(width) / size;
  for (std::int64_t y = 0; y < size; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(height - 1));
    const auto y0 = static_cast<std::int64_t>(fy);
    const std::int64_t y1 = std::min(y0 + 1, height - 1);
    const double wy = fy - y0;
    for (std::int64_t x = 0; x < size; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(width - 1));
      const auto x0 = static_cast<std::int64_t>(fx);
      const std::int64_t x1 = std::min(x0 + 1, width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const auto px = [&](std::int64_t yy, std::int64_t xx) {
          return static_cast<double>(rgb[(yy * width + xx) * 3 + c]);
        };
        const double v = (1 - wy) * ((1 - wx) * px(y0, x0) + wx * px(y0, x1)) +
                         wy * ((1 - wx) * px(y1, x0) + wx * px(y1, x1));
        out.at(c, y, x) = static_cast<float>((v / 255.0 - kImageMean[c]) / kImageStd[c]);
      }
    }
  }
  return out;
}

Tensor load_png(const std::filesystem::path& path, std::int64_t size) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&image, path.c_str()) == 0) {
    throw Error(ErrorKind::kIo, "cannot read PNG " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  if (png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr) == 0) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorKind::kIo, "cannot decode PNG " + path.string() + ": " + msg);
  }
  return normalize_rgb8(buf.data(), image.height, image.width, size);
}

Tensor load_raw(const std::filesystem::path& path, const TensorShape& shape) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open input " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (raw.size() != static_cast<std::size_t>(shape.elements()) * sizeof(float)) {
    throw Error(ErrorKind::kIo, "raw input " + path.string() + " has " +
                                    std::to_string(raw.size()) + " bytes; expected " +
                                    std::to_string(shape.elements() * 4) + " for " +
                                    to_string(shape));
  }
  std::vector<float> v(static_cast<std::size_t>(shape.elements()));
  std::memcpy(v.data(), raw.data(), raw.size());
  return Tensor(shape, std::move(v));
}

Tensor load_input(const std::filesystem::path& path, const TensorShape& shape) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") {
    if (shape.channels != 3 || shape.height != shape.width) {
      throw Error(ErrorKind::kInvalidArgument, "PNG input needs a square 3-channel model input");
    }
    return load_png(path, shape.height);
  }
  return load_raw(path, shape);
}

std::vector<LabeledImage> read_cifar100_bin(const std::filesystem::path& path,
                                            std::size_t limit) {
  constexpr std::size_t kRecord = 2 + 3072;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open dataset " + path.string());
  std::vector<LabeledImage> out;
  std::vector<std::uint8_t> rec(kRecord);
  std::vector<std::uint8_t> hwc(3072);
  while (limit == 0 || out.size() < limit) {
    in.read(reinterpret_cast<char*>(rec.data()), kRecord);
    if (in.gcount() == 0) break;
    if (static_cast<std::size_t>(in.gcount()) != kRecord) {
      throw Error(ErrorKind::kIo, "dataset " + path.string() + " ends mid-record");
    }
    for (int c = 0; c < 3; ++c) {
      for (int i = 0; i < 1024; ++i) hwc[static_cast<std::size_t>(i * 3 + c)] = rec[2 + c * 1024 + i];
    }
    out.push_back({normalize_rgb8(hwc.data(), 32, 32, 32), rec[1]});
  }
  if (out.empty()) throw Error(ErrorKind::kIo, "dataset " + path.string() + " is empty");
  return out;
}

std::uint64_t write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorKind::kIo, "short write to " + path.string());
  return fnv1a64(std::as_bytes(std::span(content.data(), content.size())));
}

RunManifest::RunManifest(std::string command) : command_(std::move(command)) {}

void RunManifest::add_output(const std::filesystem::path& path, std::uint64_t hash,
                             std::size_t bytes) {
  outputs_.push_back({{"path", path.filename().string()}, {"fnv1a64", to_hex(hash)},
                      {"bytes", bytes}});
}

void RunManifest::add_volatile_output(const std::filesystem::path& path) {
  outputs_.push_back({{"path", path.filename().string()}, {"volatile", true}});
}

void RunManifest::write_output(const std::filesystem::path& dir, const std::string& name,
                               const std::string& content) {
  const auto path = dir / name;
  add_output(path, write_file(path, content), content.size());
}

void RunManifest::save(const std::filesystem::path& dir) const {
  nlohmann::json doc{{"tool", "splitwire"},
                     {"version", SPLITWIRE_VERSION},
                     {"command", command_},
                     {"config", config_},
                     {"outputs", outputs_}};
  write_file(dir / (command_ + ".manifest.json"), doc.dump(2) + "\n");
}

}  // namespace splitwire::cli
