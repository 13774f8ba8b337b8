#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <openssl/evp.h>

#include "trevor/errors.hpp"

namespace trevor {

using Digest = std::array<std::uint8_t, 32>;

inline Digest sha256(const std::uint8_t* data, std::size_t len) {
  Digest out{};
  unsigned int out_len = 0;
  if (EVP_Digest(data, len, out.data(), &out_len, EVP_sha256(), nullptr) != 1 ||
      out_len != out.size())
    throw std::runtime_error("sha256 failed");
  return out;
}

inline Digest sha256(const std::vector<std::uint8_t>& data) {
  return sha256(data.data(), data.size());
}

}  // namespace trevor
