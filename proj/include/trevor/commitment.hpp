#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "trevor/errors.hpp"
#include "trevor/quantize.hpp"
#include "trevor/reed_solomon.hpp"
#include "trevor/sha256.hpp"

namespace trevor {

// The single public reconciliation message E = RS(R) xor S_A, plus the code
// parameters and a digest of R for success verification. R itself is never
// serialized.
struct FuzzyCommitment {
  std::vector<std::uint8_t> payload_e;
  RsParams params;
  Digest verify_digest{};

  // params (n, k, reserved) || payload (n bytes) || digest (32 bytes)
  std::vector<std::uint8_t> serialize() const {
    std::vector<std::uint8_t> out;
    out.reserve(3 + payload_e.size() + verify_digest.size());
    out.push_back(static_cast<std::uint8_t>(params.n));
    out.push_back(static_cast<std::uint8_t>(params.k));
    out.push_back(0);
    out.insert(out.end(), payload_e.begin(), payload_e.end());
    out.insert(out.end(), verify_digest.begin(), verify_digest.end());
    return out;
  }

  static FuzzyCommitment deserialize(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 3) throw FormatError("commitment too short");
    FuzzyCommitment c;
    c.params.n = bytes[0];
    c.params.k = bytes[1];
    try {
      c.params.validate();
    } catch (const ConfigError& e) {
      throw FormatError(std::string("malformed commitment params: ") + e.what());
    }
    if (bytes.size() != 3 + c.params.n + 32)
      throw FormatError("commitment length mismatch");
    c.payload_e.assign(bytes.begin() + 3, bytes.begin() + 3 + c.params.n);
    std::copy(bytes.begin() + 3 + c.params.n, bytes.end(),
              c.verify_digest.begin());
    return c;
  }
};

namespace detail {

inline std::vector<std::uint8_t> first_bytes(const BitSequence& bits,
                                             std::size_t n) {
  if (bits.bit_len < 8 * n)
    throw InsufficientDataError("need " + std::to_string(8 * n) +
                                " bits of symbols, have " +
                                std::to_string(bits.bit_len));
  return std::vector<std::uint8_t>(bits.bytes.begin(), bits.bytes.begin() + n);
}

}  // namespace detail

inline FuzzyCommitment commit(const std::vector<std::uint8_t>& key_r,
                              const BitSequence& s_local, const RsParams& params) {
  params.validate();
  if (key_r.size() != params.k)
    throw DimensionError("key must be k = " + std::to_string(params.k) + " bytes");
  const auto mask = detail::first_bytes(s_local, params.n);
  FuzzyCommitment c;
  c.params = params;
  c.payload_e = rs_encode(key_r, params);
  for (std::size_t i = 0; i < params.n; ++i) c.payload_e[i] ^= mask[i];
  c.verify_digest = sha256(key_r);
  return c;
}

// Unmask with the local symbols and decode. Success requires both a clean
// Reed-Solomon decode and a digest match.
inline std::optional<std::vector<std::uint8_t>> decommit(
    const FuzzyCommitment& c, const BitSequence& s_local) {
  const auto mask = detail::first_bytes(s_local, c.params.n);
  std::vector<std::uint8_t> word = c.payload_e;
  for (std::size_t i = 0; i < c.params.n; ++i) word[i] ^= mask[i];
  auto decoded = rs_decode(word, c.params);
  if (!decoded) return std::nullopt;
  if (sha256(*decoded) != c.verify_digest) return std::nullopt;
  return decoded;
}

}  // namespace trevor
