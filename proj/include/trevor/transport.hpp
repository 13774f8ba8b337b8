#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstring>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "trevor/errors.hpp"
#include "trevor/wire.hpp"

namespace trevor {

struct TransportTimeout : std::runtime_error {
  TransportTimeout() : std::runtime_error("transport timeout") {}
};

// Ordered, reliable, bidirectional byte stream owned by one session.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(const std::vector<std::uint8_t>& bytes) = 0;
  // Blocks until exactly n bytes are available or the timeout expires.
  virtual std::vector<std::uint8_t> recv(std::size_t n,
                                         std::chrono::milliseconds timeout) = 0;
};

inline void send_message(Transport& t, const WireMessage& msg) {
  t.send(serialize(msg));
}

inline WireMessage recv_message(Transport& t, std::chrono::milliseconds timeout) {
  auto header = t.recv(6, timeout);
  const std::uint32_t len = std::uint32_t(header[0]) << 24 |
                            std::uint32_t(header[1]) << 16 |
                            std::uint32_t(header[2]) << 8 |
                            std::uint32_t(header[3]);
  if (len > kMaxBodyLen) throw FramingError("oversize frame body");
  auto body = len ? t.recv(len, timeout) : std::vector<std::uint8_t>{};
  std::vector<std::uint8_t> frame = std::move(header);
  frame.insert(frame.end(), body.begin(), body.end());
  return deserialize(frame);
}

namespace detail {

struct ByteQueue {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::uint8_t> data;

  void push(const std::vector<std::uint8_t>& bytes) {
    {
      std::lock_guard lock(mu);
      data.insert(data.end(), bytes.begin(), bytes.end());
    }
    cv.notify_all();
  }

  std::vector<std::uint8_t> pop(std::size_t n, std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu);
    if (!cv.wait_for(lock, timeout, [&] { return data.size() >= n; }))
      throw TransportTimeout();
    std::vector<std::uint8_t> out(data.begin(), data.begin() + n);
    data.erase(data.begin(), data.begin() + n);
    return out;
  }
};

}  // namespace detail

// In-process paired byte queues; make_loopback_pair returns the two endpoints.
class LoopbackTransport : public Transport {
 public:
  LoopbackTransport(std::shared_ptr<detail::ByteQueue> out,
                    std::shared_ptr<detail::ByteQueue> in)
      : out_(std::move(out)), in_(std::move(in)) {}

  void send(const std::vector<std::uint8_t>& bytes) override { out_->push(bytes); }

  std::vector<std::uint8_t> recv(std::size_t n,
                                 std::chrono::milliseconds timeout) override {
    return in_->pop(n, timeout);
  }

 private:
  std::shared_ptr<detail::ByteQueue> out_;
  std::shared_ptr<detail::ByteQueue> in_;
};

inline std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>>
make_loopback_pair() {
  auto a_to_b = std::make_shared<detail::ByteQueue>();
  auto b_to_a = std::make_shared<detail::ByteQueue>();
  return {std::make_unique<LoopbackTransport>(a_to_b, b_to_a),
          std::make_unique<LoopbackTransport>(b_to_a, a_to_b)};
}

// Plain TCP stream, one pairing per connection.
class TcpTransport : public Transport {
 public:
  explicit TcpTransport(int fd) : fd_(fd) {}
  ~TcpTransport() override {
    if (fd_ >= 0) ::close(fd_);
  }
  TcpTransport(const TcpTransport&) = delete;
  TcpTransport& operator=(const TcpTransport&) = delete;

  static std::unique_ptr<TcpTransport> connect(const std::string& host,
                                               std::uint16_t port) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw ProtocolError("socket() failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
      ::close(fd);
      throw ConfigError("bad host address: " + host);
    }
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      ::close(fd);
      throw ProtocolError("connect to " + host + " failed");
    }
    return std::make_unique<TcpTransport>(fd);
  }

  // Binds, accepts a single connection, and returns its transport.
  static std::unique_ptr<TcpTransport> accept_one(std::uint16_t port) {
    const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listener < 0) throw ProtocolError("socket() failed");
    const int on = 1;
    ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &on, sizeof(on));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(port);
    if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
        ::listen(listener, 1) != 0) {
      ::close(listener);
      throw ProtocolError("bind/listen on port " + std::to_string(port) +
                          " failed");
    }
    const int fd = ::accept(listener, nullptr, nullptr);
    ::close(listener);
    if (fd < 0) throw ProtocolError("accept failed");
    return std::make_unique<TcpTransport>(fd);
  }

  void send(const std::vector<std::uint8_t>& bytes) override {
    std::size_t sent = 0;
    while (sent < bytes.size()) {
      const ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, 0);
      if (n <= 0) throw ProtocolError("tcp send failed");
      sent += static_cast<std::size_t>(n);
    }
  }

  std::vector<std::uint8_t> recv(std::size_t n,
                                 std::chrono::milliseconds timeout) override {
    timeval tv{};
    tv.tv_sec = timeout.count() / 1000;
    tv.tv_usec = (timeout.count() % 1000) * 1000;
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    std::vector<std::uint8_t> out(n);
    std::size_t got = 0;
    while (got < n) {
      const ssize_t r = ::recv(fd_, out.data() + got, n - got, 0);
      if (r == 0) throw ProtocolError("peer closed connection");
      if (r < 0) {
        if (errno == EAGAIN || errno == EWOULDBLOCK) throw TransportTimeout();
        throw ProtocolError("tcp recv failed");
      }
      got += static_cast<std::size_t>(r);
    }
    return out;
  }

 private:
  int fd_;
};

}  // namespace trevor
