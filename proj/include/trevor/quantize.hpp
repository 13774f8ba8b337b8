#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "trevor/eigen.hpp"
#include "trevor/errors.hpp"
#include "trevor/signal.hpp"
#include "trevor/spectral.hpp"

namespace trevor {

enum class QuantizerKind { trevor, means, schurmann_sigg };

// Two-bit symbols for trevor, one-bit symbols (0/1) for the baselines.
struct SymbolSequence {
  std::vector<std::uint8_t> symbols;
  QuantizerKind origin = QuantizerKind::trevor;
};

struct BitSequence {
  std::vector<std::uint8_t> bytes;  // packed MSB-first
  std::size_t bit_len = 0;

  bool bit(std::size_t i) const { return (bytes[i / 8] >> (7 - i % 8)) & 1; }

  void push_bit(bool b) {
    if (bit_len % 8 == 0) bytes.push_back(0);
    if (b) bytes.back() |= std::uint8_t(1u << (7 - bit_len % 8));
    ++bit_len;
  }
};

// Concatenates eigenvector components in dominance order into one array p and
// bins each element into four equal-width bins spanning [min(p), max(p)].
// Intervals are right-open; max(p) maps into the top bin.
inline SymbolSequence trevor_quantize(const EigenBasis& basis) {
  if (basis.pairs.empty()) throw EmptyInputError("empty eigenbasis");
  std::vector<double> p;
  for (const auto& pair : basis.pairs)
    p.insert(p.end(), pair.vector.begin(), pair.vector.end());

  const auto [lo_it, hi_it] = std::minmax_element(p.begin(), p.end());
  const double lo = *lo_it, hi = *hi_it;
  if (hi == lo)
    throw DegenerateInputError("constant eigenbasis cannot be quantized");

  SymbolSequence out;
  out.origin = QuantizerKind::trevor;
  out.symbols.reserve(p.size());
  for (double x : p) {
    auto bin = static_cast<int>(4.0 * (x - lo) / (hi - lo));
    out.symbols.push_back(static_cast<std::uint8_t>(std::clamp(bin, 0, 3)));
  }
  return out;
}

// Baseline: one bit per block of time-domain samples, 1 if the block mean
// exceeds the median of all block means (strict).
inline SymbolSequence means_quantize(const SampleBuffer& buf, std::size_t block) {
  if (block == 0) throw ConfigError("block must be positive");
  const std::size_t n_blocks = buf.size() / block;
  if (n_blocks < 2)
    throw InsufficientDataError("means quantizer needs at least 2 blocks");

  std::vector<double> means(n_blocks);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < block; ++i) acc += buf.samples[b * block + i];
    means[b] = acc / static_cast<double>(block);
  }
  std::vector<double> sorted = means;
  std::sort(sorted.begin(), sorted.end());
  const double median = (n_blocks % 2 == 1)
                            ? sorted[n_blocks / 2]
                            : 0.5 * (sorted[n_blocks / 2 - 1] + sorted[n_blocks / 2]);

  SymbolSequence out;
  out.origin = QuantizerKind::means;
  out.symbols.reserve(n_blocks);
  for (double m : means) out.symbols.push_back(m > median ? 1 : 0);
  return out;
}

// Baseline: energy-difference double delta over the binned spectrogram.
// b(i,j) = 1 iff (X[i][j]-X[i][j-1]) - (X[i-1][j]-X[i-1][j-1]) > 0.
inline SymbolSequence schurmann_sigg_quantize(const ObservationMatrix& X) {
  if (X.row_count() < 2 || X.dim() < 2)
    throw InsufficientDataError(
        "schurmann-sigg quantizer needs >= 2 rows and >= 2 bins");
  SymbolSequence out;
  out.origin = QuantizerKind::schurmann_sigg;
  out.symbols.reserve((X.row_count() - 1) * (X.dim() - 1));
  for (std::size_t i = 1; i < X.row_count(); ++i)
    for (std::size_t j = 1; j < X.dim(); ++j) {
      const double d = (X.rows[i][j] - X.rows[i][j - 1]) -
                       (X.rows[i - 1][j] - X.rows[i - 1][j - 1]);
      out.symbols.push_back(d > 0.0 ? 1 : 0);
    }
  return out;
}

// Trevor symbols pack to 2 bits each, MSB first; baseline symbols to 1 bit.
inline BitSequence to_bits(const SymbolSequence& sym) {
  BitSequence out;
  for (std::uint8_t s : sym.symbols) {
    if (sym.origin == QuantizerKind::trevor) {
      out.push_bit((s >> 1) & 1);
      out.push_bit(s & 1);
    } else {
      out.push_bit(s & 1);
    }
  }
  return out;
}

inline double bit_error_rate(const BitSequence& a, const BitSequence& b) {
  if (a.bit_len != b.bit_len)
    throw DimensionError("bit sequences differ in length: " +
                         std::to_string(a.bit_len) + " vs " +
                         std::to_string(b.bit_len));
  std::size_t errors = 0;
  for (std::size_t i = 0; i < a.bit_len; ++i) errors += a.bit(i) != b.bit(i);
  return static_cast<double>(errors) / static_cast<double>(a.bit_len);
}

enum class Representation { time, fft, trevor_pc };

namespace detail {

inline double cosine_distance(const std::vector<double>& a,
                              const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0)
    throw DegenerateInputError("zero-norm representation in cosine distance");
  return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

// Binned spectrogram rows of a window, without the min_rows requirement.
inline std::vector<std::vector<double>> spectro_rows(const std::vector<double>& w,
                                                     std::size_t d,
                                                     std::size_t n_bins) {
  std::vector<std::vector<double>> rows;
  std::vector<double> block(d);
  for (std::size_t off = 0; off + d <= w.size(); off += d) {
    std::copy(w.begin() + off, w.begin() + off + d, block.begin());
    rows.push_back(bin_spectrum(block_fft_magnitude(block), n_bins));
  }
  return rows;
}

inline std::vector<double> represent(const std::vector<double>& window,
                                     Representation repr, std::size_t d,
                                     std::size_t n_bins, std::size_t k_eig) {
  switch (repr) {
    case Representation::time:
      return window;
    case Representation::fft: {
      const auto rows = spectro_rows(window, d, n_bins);
      if (rows.empty())
        throw InsufficientDataError("window shorter than one spectral block");
      std::vector<double> flat;
      for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
      return flat;
    }
    case Representation::trevor_pc: {
      const auto rows = spectro_rows(window, d, n_bins);
      if (rows.empty())
        throw InsufficientDataError("window shorter than one spectral block");
      ObservationMatrix X;
      X.rows = rows;
      const auto C = covariance(X);
      const auto basis = extract_basis(C, std::min<std::size_t>(k_eig, C.m));
      std::vector<double> p;
      for (const auto& pair : basis.pairs)
        p.insert(p.end(), pair.vector.begin(), pair.vector.end());
      return p;
    }
  }
  throw ConfigError("bad representation");
}

}  // namespace detail

// Mean over shifts s in {0, step, ..., max_shift} of the cosine distance
// between representation(ref) and representation(other shifted by s).
// trevor_pc is the concatenated top-4 eigenvector array p.
inline double mean_cosine_distance(const SampleBuffer& ref,
                                   const SampleBuffer& other, Representation repr,
                                   std::size_t max_shift, std::size_t step,
                                   std::size_t block_len_d = 2048,
                                   std::size_t n_bins = 32) {
  if (ref.size() <= max_shift || other.size() <= max_shift)
    throw InsufficientDataError("buffers too short for requested max_shift");
  if (step == 0) step = 1;
  const std::size_t window = std::min(ref.size(), other.size()) - max_shift;

  const std::vector<double> ref_win(ref.samples.begin(),
                                    ref.samples.begin() + window);
  const auto ref_repr = detail::represent(ref_win, repr, block_len_d, n_bins, 4);

  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t s = 0; s <= max_shift; s += step) {
    const std::vector<double> other_win(other.samples.begin() + s,
                                        other.samples.begin() + s + window);
    const auto other_repr =
        detail::represent(other_win, repr, block_len_d, n_bins, 4);
    acc += detail::cosine_distance(ref_repr, other_repr);
    ++count;
  }
  return acc / static_cast<double>(count);
}

}  // namespace trevor
