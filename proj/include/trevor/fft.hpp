#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "trevor/errors.hpp"

namespace trevor {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 FFT. invert=true gives the unscaled inverse;
// callers divide by n themselves.
inline void fft_inplace(std::vector<std::complex<double>>& a, bool invert = false) {
  const std::size_t n = a.size();
  if (!is_power_of_two(n))
    throw DimensionError("fft length must be a power of two, got " +
                         std::to_string(n));

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang =
        2.0 * std::numbers::pi / static_cast<double>(len) * (invert ? 1.0 : -1.0);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// Forward FFT of a real block; returns the n/2+1 nonnegative-frequency bins.
inline std::vector<std::complex<double>> rfft(const std::vector<double>& block) {
  std::vector<std::complex<double>> a(block.begin(), block.end());
  fft_inplace(a);
  a.resize(block.size() / 2 + 1);
  return a;
}

// Inverse of rfft: reconstructs a real block of length n from n/2+1 bins.
inline std::vector<double> irfft(const std::vector<std::complex<double>>& spec,
                                 std::size_t n) {
  if (spec.size() != n / 2 + 1)
    throw DimensionError("irfft expects n/2+1 spectrum bins");
  std::vector<std::complex<double>> a(n);
  for (std::size_t k = 0; k < spec.size(); ++k) a[k] = spec[k];
  for (std::size_t k = spec.size(); k < n; ++k) a[k] = std::conj(spec[n - k]);
  fft_inplace(a, true);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i].real() / static_cast<double>(n);
  return out;
}

}  // namespace trevor
