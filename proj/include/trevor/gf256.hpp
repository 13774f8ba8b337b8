#pragma once

#include <array>
#include <cstdint>

#include "trevor/errors.hpp"

namespace trevor::gf256 {

// GF(2^8) defined by x^8 + x^4 + x^3 + x^2 + 1 (0x11D), primitive element 2.

namespace detail {

struct Tables {
  std::array<std::uint8_t, 512> exp{};
  std::array<std::uint8_t, 256> log{};

  Tables() {
    std::uint16_t x = 1;
    for (int i = 0; i < 255; ++i) {
      exp[i] = static_cast<std::uint8_t>(x);
      log[x] = static_cast<std::uint8_t>(i);
      x <<= 1;
      if (x & 0x100) x ^= 0x11D;
    }
    for (int i = 255; i < 512; ++i) exp[i] = exp[i - 255];
  }
};

inline const Tables& tables() {
  static const Tables t;
  return t;
}

}  // namespace detail

inline std::uint8_t mul(std::uint8_t a, std::uint8_t b) {
  if (a == 0 || b == 0) return 0;
  const auto& t = detail::tables();
  return t.exp[t.log[a] + t.log[b]];
}

inline std::uint8_t div(std::uint8_t a, std::uint8_t b) {
  if (b == 0) throw DegenerateInputError("gf256 division by zero");
  if (a == 0) return 0;
  const auto& t = detail::tables();
  return t.exp[(t.log[a] + 255 - t.log[b]) % 255];
}

inline std::uint8_t inv(std::uint8_t a) { return div(1, a); }

// alpha^e for any integer exponent
inline std::uint8_t alpha_pow(int e) {
  const auto& t = detail::tables();
  return t.exp[((e % 255) + 255) % 255];
}

inline int log_of(std::uint8_t a) {
  if (a == 0) throw DegenerateInputError("log of zero in gf256");
  return detail::tables().log[a];
}

}  // namespace trevor::gf256
