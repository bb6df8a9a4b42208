// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors

#include "splitwire/wire.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>
#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>

#include "splitwire/accounting.hpp"
#include "splitwire/hash.hpp"

static_assert(std::endian::native == std::endian::little,
              "frame encoding assumes a little-endian host");

namespace splitwire::wire {
namespace {

using Clock = std::chrono::steady_clock;
constexpr std::array<char, 4> kMagic{'S', 'W', 'F', 'R'};
constexpr int kPollSliceMs = 100;

template <typename T>
void put(std::vector<std::byte>& out, T v) {
  const auto* p = reinterpret_cast<const std::byte*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get(std::span<const std::byte> in, std::size_t offset) {
  T v{};
  std::memcpy(&v, in.data() + offset, sizeof(T));
  return v;
}

std::uint32_t crc32_of(std::span<const std::byte> bytes) {
  uLong c = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; frames stay far below 4 GiB.
  c = ::crc32(c, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(c);
}

int remaining_ms(Clock::time_point deadline) {
  const auto left =
      std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
  return left <= 0 ? 0 : static_cast<int>(std::min<long long>(left, 1 << 30));
}

Clock::time_point deadline_after(double seconds) {
  return Clock::now() + std::chrono::duration_cast<Clock::duration>(
                            std::chrono::duration<double>(seconds));
}

void wait_fd(int fd, short events, Clock::time_point deadline, const char* what) {
  while (true) {
    pollfd p{fd, events, 0};
    const int ms = remaining_ms(deadline);
    const int r = ::poll(&p, 1, ms);
    if (r > 0) return;
    if (r == 0) throw Error(ErrorKind::kTimeout, std::string("timed out while ") + what);
    if (errno != EINTR) throw Error(ErrorKind::kIo, std::string("poll failed while ") + what);
  }
}

bool valid_type(std::uint8_t t) { return t >= 1 && t <= 4; }

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBadMagic: return "bad magic";
    case ErrorCode::kUnsupportedVersion: return "unsupported version";
    case ErrorCode::kCrcMismatch: return "crc mismatch";
    case ErrorCode::kShortRead: return "short read";
    case ErrorCode::kMalformed: return "malformed frame";
    case ErrorCode::kModelMismatch: return "model mismatch";
    case ErrorCode::kSplitMismatch: return "split mismatch";
    case ErrorCode::kOversized: return "oversized payload";
    case ErrorCode::kNoHandshake: return "no handshake";
    case ErrorCode::kInferenceFailed: return "inference failed";
  }
  return "unknown error";
}

std::vector<std::byte> encode_frame(const Frame& f) {
  if (f.payload.size() > 0xffffffffu) {
    throw WireError(ErrorCode::kOversized, "payload does not fit a u32 length");
  }
  std::vector<std::byte> out;
  out.reserve(kHeaderBytes + f.payload.size() + kTrailerBytes);
  for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
  put<std::uint8_t>(out, f.version);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(f.type));
  put<std::uint64_t>(out, f.fingerprint);
  put<std::uint8_t>(out, f.split_id);
  put<std::uint32_t>(out, f.n_c);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(f.dtype));
  put<std::uint64_t>(out, f.seed);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.payload.size()));
  out.insert(out.end(), f.payload.begin(), f.payload.end());
  put<std::uint32_t>(out, crc32_of(out));
  return out;
}

std::uint32_t peek_payload_length(std::span<const std::byte> h, std::uint32_t max_payload) {
  if (h.size() < kHeaderBytes) throw WireError(ErrorCode::kShortRead, "frame header truncated");
  if (std::memcmp(h.data(), kMagic.data(), kMagic.size()) != 0) {
    throw WireError(ErrorCode::kBadMagic, "bad frame magic");
  }
  const auto version = get<std::uint8_t>(h, 4);
  if (version != kProtocolVersion) {
    throw WireError(ErrorCode::kUnsupportedVersion,
                    "unsupported protocol version " + std::to_string(version));
  }
  const auto len = get<std::uint32_t>(h, 28);
  if (len > max_payload) {
    throw WireError(ErrorCode::kOversized, "payload of " + std::to_string(len) +
                                               " bytes exceeds the limit");
  }
  return len;
}

Frame decode_frame(std::span<const std::byte> bytes, std::uint32_t max_payload) {
  const std::uint32_t len = peek_payload_length(bytes, max_payload);
  const std::size_t total = kHeaderBytes + std::size_t{len} + kTrailerBytes;
  if (bytes.size() < total) throw WireError(ErrorCode::kShortRead, "frame truncated");
  if (bytes.size() > total) throw WireError(ErrorCode::kMalformed, "trailing bytes after frame");
  const std::uint32_t stored = get<std::uint32_t>(bytes, total - kTrailerBytes);
  if (stored != crc32_of(bytes.first(total - kTrailerBytes))) {
    throw WireError(ErrorCode::kCrcMismatch, "frame crc mismatch");
  }
  Frame f;
  f.version = get<std::uint8_t>(bytes, 4);
  const auto type = get<std::uint8_t>(bytes, 5);
  if (!valid_type(type)) {
    throw WireError(ErrorCode::kMalformed, "unknown message type " + std::to_string(type));
  }
  f.type = static_cast<MsgType>(type);
  f.fingerprint = get<std::uint64_t>(bytes, 6);
  f.split_id = get<std::uint8_t>(bytes, 14);
  f.n_c = get<std::uint32_t>(bytes, 15);
  const auto dtype = get<std::uint8_t>(bytes, 19);
  if (dtype > 1) throw WireError(ErrorCode::kMalformed, "unknown dtype " + std::to_string(dtype));
  f.dtype = static_cast<PayloadDtype>(dtype);
  f.seed = get<std::uint64_t>(bytes, 20);
  if (f.split_id >= kSplitPointCount) {
    throw WireError(ErrorCode::kMalformed, "split id out of range");
  }
  const auto payload = bytes.subspan(kHeaderBytes, len);
  f.payload.assign(payload.begin(), payload.end());
  if (f.type == MsgType::kFeatures &&
      f.payload.size() !=
          expected_payload_bytes(f.n_c, f.dtype, static_cast<SplitPoint>(f.split_id))) {
    throw WireError(ErrorCode::kMalformed, "payload length inconsistent with n_c and dtype");
  }
  return f;
}

std::vector<std::byte> encode_label(const LabelReply& r) {
  std::vector<std::byte> out;
  put(out, r.label);
  put(out, r.seed_used);
  put(out, r.zhat_digest);
  put(out, r.t_m_r);
  put(out, r.server_seconds);
  return out;
}

LabelReply decode_label(std::span<const std::byte> p) {
  if (p.size() != 36) throw WireError(ErrorCode::kMalformed, "LABEL payload must be 36 bytes");
  LabelReply r;
  r.label = get<std::uint32_t>(p, 0);
  r.seed_used = get<std::uint64_t>(p, 4);
  r.zhat_digest = get<std::uint64_t>(p, 12);
  r.t_m_r = get<double>(p, 20);
  r.server_seconds = get<double>(p, 28);
  return r;
}

std::vector<std::byte> encode_error(ErrorCode code, std::string_view message) {
  std::vector<std::byte> out;
  put(out, static_cast<std::uint16_t>(code));
  const auto* m = reinterpret_cast<const std::byte*>(message.data());
  out.insert(out.end(), m, m + message.size());
  return out;
}

std::pair<ErrorCode, std::string> decode_error(std::span<const std::byte> p) {
  if (p.size() < 2) throw WireError(ErrorCode::kMalformed, "ERROR payload too short");
  const auto code = static_cast<ErrorCode>(get<std::uint16_t>(p, 0));
  return {code, std::string(reinterpret_cast<const char*>(p.data()) + 2, p.size() - 2)};
}

Socket::Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

Socket::~Socket() { close(); }

void Socket::close() noexcept {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void Socket::shutdown() noexcept {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

Socket Socket::connect(const std::string& host, std::uint16_t port, double timeout_s) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw Error(ErrorKind::kProtocol, "cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, ::freeaddrinfo);
  const auto deadline = deadline_after(timeout_s);
  std::string last_error = "no address";
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol));
    if (!s.valid()) continue;
    const int flags = ::fcntl(s.fd_, F_GETFL, 0);
    ::fcntl(s.fd_, F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(s.fd_, ai->ai_addr, ai->ai_addrlen);
    if (rc != 0 && errno == EINPROGRESS) {
      wait_fd(s.fd_, POLLOUT, deadline, "connecting");
      int err = 0;
      socklen_t len = sizeof(err);
      ::getsockopt(s.fd_, SOL_SOCKET, SO_ERROR, &err, &len);
      rc = err == 0 ? 0 : -1;
      errno = err;
    }
    if (rc != 0) {
      last_error = std::strerror(errno);
      continue;
    }
    ::fcntl(s.fd_, F_SETFL, flags);
    const int one = 1;
    ::setsockopt(s.fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return s;
  }
  throw Error(ErrorKind::kProtocol,
              "cannot connect to " + host + ":" + service + ": " + last_error);
}

void Socket::write_all(std::span<const std::byte> bytes, double timeout_s) {
  const auto deadline = deadline_after(timeout_s);
  std::size_t done = 0;
  while (done < bytes.size()) {
    wait_fd(fd_, POLLOUT, deadline, "sending");
    const ssize_t n = ::send(fd_, bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw Error(ErrorKind::kProtocol, std::string("send failed: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
}

void Socket::read_exact(std::span<std::byte> out, double timeout_s) {
  const auto deadline = deadline_after(timeout_s);
  std::size_t done = 0;
  while (done < out.size()) {
    wait_fd(fd_, POLLIN, deadline, "receiving");
    const ssize_t n = ::recv(fd_, out.data() + done, out.size() - done, 0);
    if (n == 0) {
      throw WireError(ErrorCode::kShortRead, done == 0 ? "connection closed" : "short read");
    }
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw Error(ErrorKind::kProtocol, std::string("recv failed: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
}

void write_frame(Socket& socket, const Frame& frame, double timeout_s) {
  socket.write_all(encode_frame(frame), timeout_s);
}

Frame read_frame(Socket& socket, double timeout_s, std::uint32_t max_payload) {
  std::vector<std::byte> buf(kHeaderBytes);
  socket.read_exact(buf, timeout_s);
  const std::uint32_t len = peek_payload_length(buf, max_payload);
  buf.resize(kHeaderBytes + len + kTrailerBytes);
  socket.read_exact(std::span(buf).subspan(kHeaderBytes), timeout_s);
  return decode_frame(buf, max_payload);
}

void SessionConfig::validate() const {
  if (!(timeout_s > 0.0) || !std::isfinite(timeout_s)) {
    throw Error(ErrorKind::kInvalidArgument, "timeout must be positive");
  }
  channel.validate();
}

std::uint64_t model_fingerprint(const SplitModel& model, const WeightStore& weights) {
  Fnv1a64 h;
  h.update_pod(weights.fingerprint());
  h.update(model.vanilla.name());
  h.update_pod(static_cast<std::uint8_t>(model.split));
  h.update_pod(model.n_c);
  h.update_pod(static_cast<std::int32_t>(model.decompress_stages));
  h.update_pod(model.latent_shape.channels);
  h.update_pod(model.latent_shape.height);
  h.update_pod(model.latent_shape.width);
  return h.digest();
}

// ---------------------------------------------------------------------------

Server::Server(SplitModel model, WeightStore weights, SessionConfig config)
    : model_(std::move(model)), weights_(std::move(weights)), config_(std::move(config)) {
  config_.validate();
  validate_weights(model_.decoder, weights_);
  fingerprint_ = model_fingerprint(model_, weights_);
}

Server::~Server() { stop(); }

std::uint16_t Server::start() {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(config_.port);
  if (const int rc = ::getaddrinfo(config_.host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw Error(ErrorKind::kIo, "cannot resolve " + config_.host + ": " + ::gai_strerror(rc));
  }
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, ::freeaddrinfo);
  std::string last_error = "no address";
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol));
    if (!s.valid()) continue;
    const int one = 1;
    ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(s.fd(), ai->ai_addr, ai->ai_addrlen) != 0 || ::listen(s.fd(), 64) != 0) {
      last_error = std::strerror(errno);
      continue;
    }
    sockaddr_storage addr{};
    socklen_t len = sizeof(addr);
    ::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.ss_family == AF_INET6
                      ? reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port
                      : reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
    listener_ = std::move(s);
    break;
  }
  if (!listener_.valid()) {
    throw Error(ErrorKind::kIo, "cannot listen on " + config_.host + ":" + service + ": " +
                                    last_error);
  }
  stopping_ = false;
  acceptor_ = std::thread([this] { accept_loop(); });
  return port_;
}

void Server::stop() {
  stopping_ = true;
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    for (int fd : live_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& t : workers) {
    if (t.joinable()) t.join();
  }
  listener_.close();
}

void Server::wait() {
  while (!stopping_.load()) std::this_thread::sleep_for(std::chrono::milliseconds(kPollSliceMs));
}

void Server::accept_loop() {
  while (!stopping_.load()) {
    pollfd p{listener_.fd(), POLLIN, 0};
    const int r = ::poll(&p, 1, kPollSliceMs);
    if (r <= 0) continue;
    const int fd = ::accept4(listener_.fd(), nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    std::lock_guard lock(mu_);
    live_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { handle(Socket(fd)); });
  }
}

void Server::handle(Socket socket) {
  const int fd = socket.fd();
  bool handshaken = false;
  while (!stopping_.load()) {
    pollfd p{fd, POLLIN, 0};
    const int r = ::poll(&p, 1, kPollSliceMs);
    if (r == 0) continue;
    if (r < 0 && errno == EINTR) continue;
    if (r < 0) break;
    Frame reply;
    try {
      const Frame request = read_frame(socket, config_.timeout_s, config_.max_payload);
      reply = process(request, handshaken);
    } catch (const WireError& e) {
      ++rejected_;
      // Stream position is unknown after these, so the connection ends.
      const bool fatal = e.code() == ErrorCode::kShortRead || e.code() == ErrorCode::kOversized ||
                         e.code() == ErrorCode::kBadMagic ||
                         e.code() == ErrorCode::kUnsupportedVersion;
      if (e.code() == ErrorCode::kShortRead || e.code() == ErrorCode::kOversized) break;
      reply = Frame{};
      reply.type = MsgType::kError;
      reply.fingerprint = fingerprint_;
      reply.payload = encode_error(e.code(), e.what());
      try {
        write_frame(socket, reply, config_.timeout_s);
      } catch (const Error&) {
        break;
      }
      if (fatal) break;
      continue;
    } catch (const Error&) {
      break;  // timeout or transport failure
    }
    try {
      write_frame(socket, reply, config_.timeout_s);
    } catch (const Error&) {
      break;
    }
  }
  std::lock_guard lock(mu_);
  live_fds_.erase(std::remove(live_fds_.begin(), live_fds_.end(), fd), live_fds_.end());
}

Frame Server::process(const Frame& req, bool& handshaken) {
  Frame reply;
  reply.fingerprint = fingerprint_;
  reply.split_id = static_cast<std::uint8_t>(model_.split);
  reply.n_c = static_cast<std::uint32_t>(model_.n_c);
  reply.dtype = req.dtype;
  reply.seed = req.seed;
  const auto fail = [&](ErrorCode code, const std::string& msg) {
    ++rejected_;
    reply.type = MsgType::kError;
    reply.payload = encode_error(code, msg);
    return reply;
  };
  if (req.type != MsgType::kHello && req.type != MsgType::kFeatures) {
    return fail(ErrorCode::kMalformed, "unexpected message type");
  }
  if (req.fingerprint != fingerprint_) {
    return fail(ErrorCode::kModelMismatch, "model mismatch: server fingerprint " +
                                               to_hex(fingerprint_) + ", client " +
                                               to_hex(req.fingerprint));
  }
  if (req.split_id != static_cast<std::uint8_t>(model_.split) ||
      static_cast<std::int64_t>(req.n_c) != model_.n_c) {
    return fail(ErrorCode::kSplitMismatch,
                "split mismatch: server runs " + to_string(model_.split) + " with n_c " +
                    std::to_string(model_.n_c));
  }
  if (req.type == MsgType::kHello) {
    handshaken = true;
    reply.type = MsgType::kHello;
    return reply;
  }
  if (!handshaken) return fail(ErrorCode::kNoHandshake, "FEATURES before HELLO");

  const auto t0 = Clock::now();
  ServedRequest served;
  served.seed = req.seed;
  try {
    served.result =
        receive(model_, weights_, req.payload, req.dtype, sigma_for(config_.channel), req.seed);
  } catch (const Error& e) {
    return fail(ErrorCode::kInferenceFailed, e.what());
  }
  LabelReply lr;
  lr.label = static_cast<std::uint32_t>(served.result.label);
  lr.seed_used = served.result.seed_used;
  lr.zhat_digest = digest(served.result.z_hat);
  lr.t_m_r = served.result.t_m_r;
  lr.server_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  reply.type = MsgType::kLabel;
  reply.seed = served.result.seed_used;
  reply.payload = encode_label(lr);
  ++served_;
  if (on_features) on_features(served);
  return reply;
}

// ---------------------------------------------------------------------------

Client::Client(const SplitModel& model, const WeightStore& weights, SessionConfig config)
    : model_(model), weights_(weights), config_(std::move(config)) {
  config_.validate();
  validate_weights(model_.encoder, weights_);
  fingerprint_ = model_fingerprint(model_, weights_);
  socket_ = Socket::connect(config_.host, config_.port, config_.timeout_s);
  handshake();
}

Frame Client::exchange(const Frame& request) {
  write_frame(socket_, request, config_.timeout_s);
  return read_frame(socket_, config_.timeout_s, config_.max_payload);
}

void Client::handshake() {
  Frame hello;
  hello.type = MsgType::kHello;
  hello.fingerprint = fingerprint_;
  hello.split_id = static_cast<std::uint8_t>(model_.split);
  hello.n_c = static_cast<std::uint32_t>(model_.n_c);
  hello.dtype = config_.channel.dtype;
  const Frame reply = exchange(hello);
  if (reply.type == MsgType::kError) {
    const auto [code, msg] = decode_error(reply.payload);
    throw WireError(code, "handshake rejected: " + msg);
  }
  if (reply.type != MsgType::kHello) {
    throw WireError(ErrorCode::kMalformed, "unexpected handshake reply");
  }
}

SendResult Client::send(const Tensor& input, std::uint64_t seed) {
  const TransmitResult tx = transmit(model_, weights_, input, config_.channel.dtype);
  Frame req;
  req.type = MsgType::kFeatures;
  req.fingerprint = fingerprint_;
  req.split_id = static_cast<std::uint8_t>(model_.split);
  req.n_c = static_cast<std::uint32_t>(model_.n_c);
  req.dtype = config_.channel.dtype;
  req.seed = seed;
  req.payload = tx.payload;

  const auto t0 = Clock::now();
  const Frame reply = exchange(req);
  const double rtt = std::chrono::duration<double>(Clock::now() - t0).count();
  if (reply.type == MsgType::kError) {
    const auto [code, msg] = decode_error(reply.payload);
    throw WireError(code, msg);
  }
  if (reply.type != MsgType::kLabel) throw WireError(ErrorCode::kMalformed, "expected LABEL");
  const LabelReply lr = decode_label(reply.payload);

  SendResult r;
  r.label = lr.label;
  r.seed_used = lr.seed_used;
  r.zhat_digest = lr.zhat_digest;
  r.timing.t_m_t = tx.t_m_t;
  r.timing.t_m_r = lr.t_m_r;
  r.timing.round_trip = rtt;
  r.timing.transfer = std::max(0.0, rtt - lr.server_seconds);
  r.timing.payload_bytes = req.payload.size();
  r.timing.frame_bytes = kHeaderBytes + req.payload.size() + kTrailerBytes;
  const FlopReport flops = count_flops(model_);
  r.timing.predicted =
      total_task_time(flops, dev_t_, dev_r_,
                      payload_bits(model_.n_c, config_.channel.dtype, model_.split),
                      config_.channel);
  return r;
}

}  // namespace splitwire::wire
