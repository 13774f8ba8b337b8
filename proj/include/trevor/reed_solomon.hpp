#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "trevor/errors.hpp"
#include "trevor/gf256.hpp"

namespace trevor {

// Systematic Reed-Solomon code over GF(256), generator roots alpha^0..alpha^{2t-1}.
// Codes with n < 255 are the shortened code (virtual leading zero data symbols).
struct RsParams {
  std::size_t n = 255;
  std::size_t k = 191;

  std::size_t t() const { return (n - k) / 2; }

  void validate() const {
    if (n > 255) throw ConfigError("rs: n must be <= 255");
    if (k == 0 || k >= n) throw ConfigError("rs: need 0 < k < n");
    if ((n - k) % 2 != 0) throw ConfigError("rs: n - k must be even");
  }
};

namespace rs_detail {

using Poly = std::vector<std::uint8_t>;  // index 0 = highest-degree coefficient

inline Poly generator_poly(std::size_t parity) {
  Poly g{1};
  for (std::size_t i = 0; i < parity; ++i) {
    // multiply g by (x - alpha^i)
    Poly next(g.size() + 1, 0);
    for (std::size_t j = 0; j < g.size(); ++j) {
      next[j] ^= g[j];
      next[j + 1] ^= gf256::mul(g[j], gf256::alpha_pow(static_cast<int>(i)));
    }
    g = std::move(next);
  }
  return g;
}

inline std::uint8_t poly_eval(const Poly& p, std::uint8_t x) {
  std::uint8_t y = 0;
  for (std::uint8_t c : p) y = static_cast<std::uint8_t>(gf256::mul(y, x) ^ c);
  return y;
}

}  // namespace rs_detail

inline std::vector<std::uint8_t> rs_encode(const std::vector<std::uint8_t>& data,
                                           const RsParams& params) {
  params.validate();
  if (data.size() != params.k)
    throw DimensionError("rs_encode expects " + std::to_string(params.k) +
                         " data bytes, got " + std::to_string(data.size()));
  const std::size_t parity = params.n - params.k;
  const auto g = rs_detail::generator_poly(parity);

  // Remainder of data(x) * x^parity divided by g(x).
  std::vector<std::uint8_t> rem(parity, 0);
  for (std::uint8_t d : data) {
    const std::uint8_t coef = static_cast<std::uint8_t>(d ^ rem.front());
    rem.erase(rem.begin());
    rem.push_back(0);
    if (coef != 0)
      for (std::size_t j = 0; j < parity; ++j)
        rem[j] = static_cast<std::uint8_t>(rem[j] ^ gf256::mul(g[j + 1], coef));
  }

  std::vector<std::uint8_t> codeword = data;
  codeword.insert(codeword.end(), rem.begin(), rem.end());
  return codeword;
}

// Returns the data bytes iff the word carries at most t symbol errors; empty
// optional on decode failure. Corrected words are re-checked against the
// syndromes so a bad correction is reported as failure.
inline std::optional<std::vector<std::uint8_t>> rs_decode(
    const std::vector<std::uint8_t>& word, const RsParams& params) {
  params.validate();
  if (word.size() != params.n)
    throw DimensionError("rs_decode expects " + std::to_string(params.n) +
                         " bytes, got " + std::to_string(word.size()));
  const std::size_t parity = params.n - params.k;
  const std::size_t n = params.n;

  auto syndromes = [&](const std::vector<std::uint8_t>& w) {
    std::vector<std::uint8_t> s(parity);
    for (std::size_t j = 0; j < parity; ++j)
      s[j] = rs_detail::poly_eval(w, gf256::alpha_pow(static_cast<int>(j)));
    return s;
  };

  auto synd = syndromes(word);
  bool clean = true;
  for (std::uint8_t s : synd) clean &= (s == 0);
  if (clean)
    return std::vector<std::uint8_t>(word.begin(), word.begin() + params.k);

  // Berlekamp-Massey for the error locator sigma (ascending-degree coeffs).
  std::vector<std::uint8_t> sigma{1}, prev{1};
  std::size_t L = 0, m = 1;
  std::uint8_t b = 1;
  for (std::size_t r = 0; r < parity; ++r) {
    std::uint8_t delta = synd[r];
    for (std::size_t i = 1; i <= L && i < sigma.size(); ++i)
      delta = static_cast<std::uint8_t>(delta ^ gf256::mul(sigma[i], synd[r - i]));
    if (delta == 0) {
      ++m;
    } else if (2 * L <= r) {
      const std::vector<std::uint8_t> tmp = sigma;
      const std::uint8_t scale = gf256::div(delta, b);
      if (sigma.size() < prev.size() + m) sigma.resize(prev.size() + m, 0);
      for (std::size_t i = 0; i < prev.size(); ++i)
        sigma[i + m] = static_cast<std::uint8_t>(sigma[i + m] ^
                                                 gf256::mul(scale, prev[i]));
      L = r + 1 - L;
      prev = tmp;
      b = delta;
      m = 1;
    } else {
      const std::uint8_t scale = gf256::div(delta, b);
      if (sigma.size() < prev.size() + m) sigma.resize(prev.size() + m, 0);
      for (std::size_t i = 0; i < prev.size(); ++i)
        sigma[i + m] = static_cast<std::uint8_t>(sigma[i + m] ^
                                                 gf256::mul(scale, prev[i]));
      ++m;
    }
  }
  while (!sigma.empty() && sigma.back() == 0) sigma.pop_back();
  const std::size_t n_errors = sigma.size() - 1;
  if (n_errors > params.t()) return std::nullopt;

  // Chien search: word position i corresponds to polynomial power n-1-i.
  std::vector<std::size_t> positions;
  for (std::size_t i = 0; i < n; ++i) {
    const int power = static_cast<int>(n - 1 - i);
    std::uint8_t acc = 0;
    for (std::size_t j = 0; j < sigma.size(); ++j)
      acc = static_cast<std::uint8_t>(
          acc ^ gf256::mul(sigma[j], gf256::alpha_pow(-power * static_cast<int>(j))));
    if (acc == 0) positions.push_back(i);
  }
  if (positions.size() != n_errors) return std::nullopt;

  // Forney: error magnitude at each located position.
  // Omega(x) = [S(x) * sigma(x)] mod x^parity, S ascending in x.
  std::vector<std::uint8_t> omega(parity, 0);
  for (std::size_t i = 0; i < parity; ++i)
    for (std::size_t j = 0; j < sigma.size() && j <= i; ++j)
      omega[i] = static_cast<std::uint8_t>(omega[i] ^
                                           gf256::mul(synd[i - j], sigma[j]));

  std::vector<std::uint8_t> corrected = word;
  for (std::size_t pos : positions) {
    const int power = static_cast<int>(n - 1 - pos);
    const std::uint8_t x_inv = gf256::alpha_pow(-power);
    std::uint8_t num = 0;
    for (std::size_t i = 0; i < omega.size(); ++i) {
      std::uint8_t term = omega[i];
      for (std::size_t q = 0; q < i; ++q) term = gf256::mul(term, x_inv);
      num = static_cast<std::uint8_t>(num ^ term);
    }
    // sigma'(x): formal derivative keeps odd-degree terms only
    std::uint8_t den = 0;
    for (std::size_t j = 1; j < sigma.size(); j += 2) {
      std::uint8_t term = sigma[j];
      for (std::size_t q = 0; q + 1 < j; ++q) term = gf256::mul(term, x_inv);
      den = static_cast<std::uint8_t>(den ^ term);
    }
    if (den == 0) return std::nullopt;
    // e = X * Omega(X^-1) / sigma'(X^-1) with X = alpha^power
    const std::uint8_t magnitude =
        gf256::mul(gf256::alpha_pow(power), gf256::div(num, den));
    corrected[pos] = static_cast<std::uint8_t>(corrected[pos] ^ magnitude);
  }

  for (std::uint8_t s : syndromes(corrected))
    if (s != 0) return std::nullopt;
  return std::vector<std::uint8_t>(corrected.begin(), corrected.begin() + params.k);
}

}  // namespace trevor
