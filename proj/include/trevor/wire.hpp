#pragma once

#include <cstdint>
#include <vector>

#include "trevor/errors.hpp"

namespace trevor {

enum class MsgType : std::uint8_t {
  INIT = 1,
  SYNC_SNIPPET = 2,
  COMMIT = 3,
  RESULT = 4,
};

constexpr std::uint8_t kWireVersion = 1;
constexpr std::size_t kMaxBodyLen = 1 << 20;  // 1 MiB

// Frame layout: 4-byte big-endian body length || 1-byte type || 1-byte
// version || body.
struct WireMessage {
  MsgType msg_type = MsgType::INIT;
  std::uint8_t version = kWireVersion;
  std::vector<std::uint8_t> body;
};

inline std::vector<std::uint8_t> serialize(const WireMessage& msg) {
  if (msg.body.size() > kMaxBodyLen) throw FramingError("oversize frame body");
  std::vector<std::uint8_t> out;
  out.reserve(6 + msg.body.size());
  const auto len = static_cast<std::uint32_t>(msg.body.size());
  out.push_back(static_cast<std::uint8_t>(len >> 24));
  out.push_back(static_cast<std::uint8_t>(len >> 16));
  out.push_back(static_cast<std::uint8_t>(len >> 8));
  out.push_back(static_cast<std::uint8_t>(len));
  out.push_back(static_cast<std::uint8_t>(msg.msg_type));
  out.push_back(msg.version);
  out.insert(out.end(), msg.body.begin(), msg.body.end());
  return out;
}

// Parses one frame; `consumed` reports how many input bytes it used.
inline WireMessage deserialize(const std::vector<std::uint8_t>& bytes,
                               std::size_t* consumed = nullptr) {
  if (bytes.size() < 6) throw FramingError("truncated frame header");
  const std::uint32_t len = std::uint32_t(bytes[0]) << 24 |
                            std::uint32_t(bytes[1]) << 16 |
                            std::uint32_t(bytes[2]) << 8 | std::uint32_t(bytes[3]);
  if (len > kMaxBodyLen) throw FramingError("oversize frame body");
  if (bytes.size() < 6 + len) throw FramingError("truncated frame body");
  const std::uint8_t type = bytes[4];
  if (type < 1 || type > 4) throw ProtocolError("unknown message type");
  if (bytes[5] != kWireVersion) throw ProtocolError("unsupported wire version");
  WireMessage msg;
  msg.msg_type = static_cast<MsgType>(type);
  msg.version = bytes[5];
  msg.body.assign(bytes.begin() + 6, bytes.begin() + 6 + len);
  if (consumed) *consumed = 6 + len;
  return msg;
}

}  // namespace trevor
