// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors
//
// Framed request/response protocol between the edge runner (encoder) and
// the cloud runner (decoder) over TCP.
//
// Frame (little-endian):
//   "SWFR" | version u8 | msg_type u8 | fingerprint u64 | split_id u8 |
//   n_c u32 | dtype u8 | seed u64 | payload_len u32 | payload | crc32 u32
// The CRC-32 (zlib polynomial) covers header and payload.

#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "splitwire/channel.hpp"
#include "splitwire/cost_model.hpp"
#include "splitwire/error.hpp"
#include "splitwire/model_graph.hpp"
#include "splitwire/pipeline.hpp"
#include "splitwire/weights.hpp"

namespace splitwire::wire {

inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::size_t kHeaderBytes = 32;
inline constexpr std::size_t kTrailerBytes = 4;
inline constexpr std::uint32_t kDefaultMaxPayload = 64u << 20;

enum class MsgType : std::uint8_t { kFeatures = 1, kLabel = 2, kError = 3, kHello = 4 };

enum class ErrorCode : std::uint16_t {
  kBadMagic = 1,
  kUnsupportedVersion = 2,
  kCrcMismatch = 3,
  kShortRead = 4,
  kMalformed = 5,
  kModelMismatch = 6,
  kSplitMismatch = 7,
  kOversized = 8,
  kNoHandshake = 9,
  kInferenceFailed = 10,
};

std::string_view to_string(ErrorCode code);

class WireError : public Error {
 public:
  WireError(ErrorCode code, const std::string& what)
      : Error(ErrorKind::kProtocol, what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct Frame {
  std::uint8_t version = kProtocolVersion;
  MsgType type = MsgType::kFeatures;
  std::uint64_t fingerprint = 0;
  std::uint8_t split_id = 0;
  std::uint32_t n_c = 0;
  PayloadDtype dtype = PayloadDtype::kF32;
  std::uint64_t seed = 0;
  std::vector<std::byte> payload;

  friend bool operator==(const Frame&, const Frame&) = default;
};

std::vector<std::byte> encode_frame(const Frame& frame);

// Parses exactly one frame occupying all of `bytes`. Validates magic,
// version, message type, dtype, CRC, split id, and for FEATURES frames the
// payload length against (n_c, dtype, split).
Frame decode_frame(std::span<const std::byte> bytes,
                   std::uint32_t max_payload = kDefaultMaxPayload);

// Header-only checks; returns payload_len. Used when reading from a stream.
std::uint32_t peek_payload_length(std::span<const std::byte> header,
                                  std::uint32_t max_payload = kDefaultMaxPayload);

struct LabelReply {
  std::uint32_t label = 0;
  std::uint64_t seed_used = 0;
  std::uint64_t zhat_digest = 0;
  double t_m_r = 0.0;           // decoder wall-clock seconds
  double server_seconds = 0.0;  // receipt to reply
};

std::vector<std::byte> encode_label(const LabelReply& reply);
LabelReply decode_label(std::span<const std::byte> payload);

std::vector<std::byte> encode_error(ErrorCode code, std::string_view message);
std::pair<ErrorCode, std::string> decode_error(std::span<const std::byte> payload);

// Blocking TCP stream with per-operation timeouts. Move-only.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) noexcept : fd_(fd) {}
  Socket(Socket&& other) noexcept;
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket();

  static Socket connect(const std::string& host, std::uint16_t port, double timeout_s);

  bool valid() const noexcept { return fd_ >= 0; }
  int fd() const noexcept { return fd_; }
  void close() noexcept;
  void shutdown() noexcept;

  void write_all(std::span<const std::byte> bytes, double timeout_s);
  // Throws WireError(kShortRead) on EOF mid-read and Error(kTimeout).
  void read_exact(std::span<std::byte> out, double timeout_s);

 private:
  int fd_ = -1;
};

void write_frame(Socket& socket, const Frame& frame, double timeout_s);
Frame read_frame(Socket& socket, double timeout_s,
                 std::uint32_t max_payload = kDefaultMaxPayload);

struct SessionConfig {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0 lets the server pick
  double timeout_s = 10.0;
  ChannelProfile channel;  // SNR used by the server; dtype used by the sender
  std::uint32_t max_payload = kDefaultMaxPayload;

  void validate() const;
};

// Fingerprint both runners compare during the handshake: the weight
// container content hash mixed with the split configuration.
std::uint64_t model_fingerprint(const SplitModel& model, const WeightStore& weights);

struct ServedRequest {
  std::uint64_t seed = 0;
  ReceiveResult result;
};

class Server {
 public:
  Server(SplitModel model, WeightStore weights, SessionConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and starts accepting; returns the bound port.
  std::uint16_t start();
  void stop();
  // Async-signal-safe: only flips the stop flag. wait() then returns and the
  // owner calls stop().
  void request_stop() noexcept { stopping_.store(true); }
  void wait();

  std::uint16_t port() const noexcept { return port_; }
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }
  std::size_t served() const noexcept { return served_.load(); }
  std::size_t rejected() const noexcept { return rejected_.load(); }

  // Invoked after each successful FEATURES request (from connection threads).
  std::function<void(const ServedRequest&)> on_features;

 private:
  void accept_loop();
  void handle(Socket socket);
  Frame process(const Frame& request, bool& handshaken);

  SplitModel model_;
  WeightStore weights_;
  SessionConfig config_;
  std::uint64_t fingerprint_ = 0;
  Socket listener_;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::atomic<std::size_t> served_{0};
  std::atomic<std::size_t> rejected_{0};
  std::thread acceptor_;
  std::mutex mu_;
  std::vector<std::thread> workers_;
  std::vector<int> live_fds_;
};

struct TimingReport {
  double t_m_t = 0.0;       // measured encoder seconds
  double transfer = 0.0;    // round trip minus server-reported time
  double t_m_r = 0.0;       // server-reported decoder seconds
  double round_trip = 0.0;  // request sent to reply received
  std::size_t payload_bytes = 0;
  std::size_t frame_bytes = 0;
  CostReport predicted;
};

struct SendResult {
  std::int64_t label = -1;
  std::uint64_t seed_used = 0;
  std::uint64_t zhat_digest = 0;
  TimingReport timing;
};

// Edge runner. Holds one connection with a completed handshake; each call
// to send() is one strict request/response exchange.
class Client {
 public:
  Client(const SplitModel& model, const WeightStore& weights, SessionConfig config);

  SendResult send(const Tensor& input, std::uint64_t seed);
  // Sends a pre-built frame and returns the raw reply (for tests).
  Frame exchange(const Frame& request);

  void set_devices(DeviceProfile dev_t, DeviceProfile dev_r) {
    dev_t_ = dev_t;
    dev_r_ = dev_r;
  }

 private:
  void handshake();

  const SplitModel& model_;
  const WeightStore& weights_;
  SessionConfig config_;
  std::uint64_t fingerprint_ = 0;
  Socket socket_;
  DeviceProfile dev_t_{1e-9};
  DeviceProfile dev_r_{1e-9};
};

}  // namespace splitwire::wire
