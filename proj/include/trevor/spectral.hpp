#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "trevor/errors.hpp"
#include "trevor/fft.hpp"
#include "trevor/signal.hpp"

namespace trevor {

struct SpectralConfig {
  std::size_t block_len_d = 2048;
  std::size_t n_bins = 32;
  std::size_t min_rows = 64;

  void validate() const {
    if (!is_power_of_two(block_len_d))
      throw ConfigError("block_len_d must be a power of two");
    if (n_bins == 0 || n_bins > block_len_d / 2)
      throw ConfigError("n_bins must be in [1, block_len_d/2]");
    if (min_rows <= n_bins)
      throw ConfigError("min_rows must exceed n_bins (rows >> dims)");
  }
};

// Rows of binned FFT magnitudes from consecutive signal blocks.
struct ObservationMatrix {
  std::vector<std::vector<double>> rows;
  SpectralConfig config;

  std::size_t row_count() const { return rows.size(); }
  std::size_t dim() const { return rows.empty() ? 0 : rows.front().size(); }
};

// Magnitudes of DFT bins 1..d/2; the DC bin is discarded.
inline std::vector<double> block_fft_magnitude(const std::vector<double>& block) {
  if (!is_power_of_two(block.size()))
    throw DimensionError("block length must be a power of two");
  const auto spec = rfft(block);
  std::vector<double> mags(block.size() / 2);
  for (std::size_t k = 1; k <= block.size() / 2; ++k)
    mags[k - 1] = std::abs(spec[k]);
  return mags;
}

// Sums magnitudes over n_bins contiguous ranges covering the input exactly
// once. Range sizes differ by at most one; the leftover goes to leading bins.
inline std::vector<double> bin_spectrum(const std::vector<double>& mags,
                                        std::size_t n_bins) {
  if (n_bins == 0 || n_bins > mags.size())
    throw ConfigError("n_bins must be in [1, " + std::to_string(mags.size()) + "]");
  const std::size_t base = mags.size() / n_bins;
  const std::size_t rem = mags.size() % n_bins;
  std::vector<double> out(n_bins, 0.0);
  std::size_t pos = 0;
  for (std::size_t b = 0; b < n_bins; ++b) {
    const std::size_t len = base + (b < rem ? 1 : 0);
    for (std::size_t i = 0; i < len; ++i) out[b] += mags[pos++];
  }
  return out;
}

// Splits the buffer into consecutive blocks of length d, keeps each block's
// binned magnitude spectrum as a row. The trailing partial block is dropped.
inline ObservationMatrix build_observation_matrix(const SampleBuffer& buf,
                                                  const SpectralConfig& cfg) {
  cfg.validate();
  const std::size_t required = cfg.block_len_d * cfg.min_rows;
  if (buf.size() < required)
    throw InsufficientDataError(
        "buffer of " + std::to_string(buf.size()) + " samples is too short; need " +
        std::to_string(required));

  ObservationMatrix X;
  X.config = cfg;
  const std::size_t n_rows = buf.size() / cfg.block_len_d;
  X.rows.reserve(n_rows);
  std::vector<double> block(cfg.block_len_d);
  for (std::size_t r = 0; r < n_rows; ++r) {
    const std::size_t off = r * cfg.block_len_d;
    std::copy(buf.samples.begin() + off, buf.samples.begin() + off + cfg.block_len_d,
              block.begin());
    X.rows.push_back(bin_spectrum(block_fft_magnitude(block), cfg.n_bins));
  }
  return X;
}

}  // namespace trevor
