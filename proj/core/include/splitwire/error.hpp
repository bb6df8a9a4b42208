// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors

#pragma once

#include <stdexcept>
#include <string>

namespace splitwire {

// Broad failure classes. The CLI maps these onto its exit codes.
enum class ErrorKind {
  kInvalidArgument,
  kShape,
  kFormat,
  kIo,
  kProtocol,
  kTimeout,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Shape inference failure; carries the index of the offending layer.
class ShapeError : public Error {
 public:
  ShapeError(std::size_t layer_index, const std::string& what)
      : Error(ErrorKind::kShape, "layer " + std::to_string(layer_index) + ": " + what),
        layer_index_(layer_index) {}

  std::size_t layer_index() const noexcept { return layer_index_; }

 private:
  std::size_t layer_index_;
};

}  // namespace splitwire
