#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "trevor/errors.hpp"

namespace trevor {

// A device's time-domain measurement of the environment. Samples are
// dimensionless amplitudes, nominally in [-1, 1].
struct SampleBuffer {
  std::vector<double> samples;
  std::uint32_t sample_rate_hz = 0;
  std::string source_id;

  std::size_t size() const { return samples.size(); }

  void validate() const {
    if (samples.empty()) throw EmptyInputError("sample buffer is empty");
    if (sample_rate_hz < 1) throw ConfigError("sample_rate_hz must be >= 1");
    for (double s : samples)
      if (!std::isfinite(s))
        throw FormatError("sample buffer contains a non-finite value");
  }
};

namespace detail {

inline std::uint32_t read_u32le(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw FormatError("unexpected end of file");
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 |
         std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24;
}

inline std::uint16_t read_u16le(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  if (!in) throw FormatError("unexpected end of file");
  return std::uint16_t(b[0]) | std::uint16_t(b[1]) << 8;
}

inline std::string read_tag(std::istream& in) {
  char t[4];
  in.read(t, 4);
  if (!in) throw FormatError("unexpected end of file");
  return std::string(t, 4);
}

}  // namespace detail

// Reads a 16-bit PCM RIFF WAV file. Multichannel input keeps channel 0 only.
// Samples are scaled by 1/32768 so that INT16_MIN maps to -1.0 exactly.
inline SampleBuffer load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);

  if (detail::read_tag(in) != "RIFF") throw FormatError(path + ": not a RIFF file");
  detail::read_u32le(in);  // chunk size, unused
  if (detail::read_tag(in) != "WAVE") throw FormatError(path + ": not a WAVE file");

  std::uint16_t channels = 0;
  std::uint16_t bits_per_sample = 0;
  std::uint32_t sample_rate = 0;
  bool have_fmt = false;

  SampleBuffer buf;
  buf.source_id = path;

  while (in.peek() != std::ifstream::traits_type::eof()) {
    const std::string tag = detail::read_tag(in);
    const std::uint32_t chunk_len = detail::read_u32le(in);
    if (tag == "fmt ") {
      if (chunk_len < 16) throw FormatError(path + ": fmt chunk too short");
      const std::uint16_t format = detail::read_u16le(in);
      channels = detail::read_u16le(in);
      sample_rate = detail::read_u32le(in);
      detail::read_u32le(in);  // byte rate
      detail::read_u16le(in);  // block align
      bits_per_sample = detail::read_u16le(in);
      if (format != 1) throw FormatError(path + ": only PCM WAV is supported");
      if (bits_per_sample != 16)
        throw FormatError(path + ": only 16-bit PCM is supported");
      if (channels == 0) throw FormatError(path + ": zero channels");
      in.ignore(chunk_len - 16);
      have_fmt = true;
    } else if (tag == "data") {
      if (!have_fmt) throw FormatError(path + ": data chunk before fmt chunk");
      const std::uint32_t frames = chunk_len / (2u * channels);
      buf.samples.reserve(frames);
      for (std::uint32_t f = 0; f < frames; ++f) {
        for (std::uint16_t c = 0; c < channels; ++c) {
          const std::uint16_t raw = detail::read_u16le(in);
          if (c == 0)
            buf.samples.push_back(static_cast<std::int16_t>(raw) / 32768.0);
        }
      }
      buf.sample_rate_hz = sample_rate;
      if (buf.samples.empty()) throw EmptyInputError(path + ": zero-length audio");
      return buf;
    } else {
      in.ignore(chunk_len + (chunk_len & 1));
      if (!in) throw FormatError(path + ": truncated chunk " + tag);
    }
  }
  throw FormatError(path + ": no data chunk");
}

// One real value per line; the sample rate comes from the caller.
inline SampleBuffer load_csv(const std::string& path, std::uint32_t sample_rate_hz) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);

  SampleBuffer buf;
  buf.sample_rate_hz = sample_rate_hz;
  buf.source_id = path;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(line, &pos);
    } catch (const std::exception&) {
      throw ParseError(path + ": non-numeric value at line " +
                       std::to_string(line_no));
    }
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos != line.size())
      throw ParseError(path + ": non-numeric value at line " +
                       std::to_string(line_no));
    buf.samples.push_back(v);
  }
  if (buf.samples.empty()) throw EmptyInputError(path + ": no samples");
  buf.validate();
  return buf;
}

// Shifts content right by `delay` samples, zero-filling the head. Length is
// preserved.
inline std::vector<double> shift_right(const std::vector<double>& x,
                                       std::size_t delay) {
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t i = delay; i < x.size(); ++i) out[i] = x[i - delay];
  return out;
}

}  // namespace trevor
