#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "trevor/commitment.hpp"
#include "trevor/environment.hpp"
#include "trevor/errors.hpp"
#include "trevor/fft.hpp"
#include "trevor/quantize.hpp"
#include "trevor/sha256.hpp"
#include "trevor/signal.hpp"
#include "trevor/spectral.hpp"
#include "trevor/transport.hpp"
#include "trevor/wire.hpp"

namespace trevor {

enum class Role { initiator, responder };
enum class ProtocolKind { trevor, sync_baseline };

struct PairingConfig {
  SpectralConfig spectral;
  std::size_t k_eigenvectors = 4;
  RsParams rs{32, 12};
  double sample_duration_s = 3.0;
  Role role = Role::initiator;
  ProtocolKind protocol_kind = ProtocolKind::trevor;

  void validate() const {
    spectral.validate();
    rs.validate();
    if (k_eigenvectors < 1 || k_eigenvectors > spectral.n_bins)
      throw ConfigError("k_eigenvectors must be in [1, n_bins]");
    if (sample_duration_s <= 0.0)
      throw ConfigError("sample_duration_s must be positive");
  }

  // Hash of every parameter both peers must agree on; role is excluded.
  Digest config_hash() const {
    std::vector<std::uint8_t> enc;
    auto put32 = [&](std::uint32_t v) {
      for (int i = 3; i >= 0; --i)
        enc.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    };
    enc.push_back(protocol_kind == ProtocolKind::trevor ? 0 : 1);
    put32(static_cast<std::uint32_t>(spectral.block_len_d));
    put32(static_cast<std::uint32_t>(spectral.n_bins));
    put32(static_cast<std::uint32_t>(spectral.min_rows));
    put32(static_cast<std::uint32_t>(k_eigenvectors));
    enc.push_back(static_cast<std::uint8_t>(rs.n));
    enc.push_back(static_cast<std::uint8_t>(rs.k));
    put32(static_cast<std::uint32_t>(sample_duration_s * 1000.0));
    return sha256(enc);
  }
};

enum class SessionState { idle, sampling, quantized, committed, verified, rejected };

struct TranscriptEntry {
  bool outbound = false;
  MsgType type = MsgType::INIT;
  std::vector<std::uint8_t> frame;  // full wire frame
};

struct PairingSession {
  SessionState state = SessionState::idle;
  std::string peer_id;
  std::optional<std::vector<std::uint8_t>> derived_key;
  std::vector<TranscriptEntry> transcript;
  std::string reject_reason;

  // Local diagnostics; never crosses the transport.
  BitSequence local_bits;

  bool verified() const { return state == SessionState::verified; }
};

struct RunOptions {
  std::chrono::milliseconds timeout{10000};
  // Deterministic key material for harness runs; production uses entropy.
  std::optional<std::vector<std::uint8_t>> key_override;
  std::optional<std::uint64_t> key_seed;
};

namespace detail {

inline std::vector<std::uint8_t> random_key(std::size_t k,
                                            const RunOptions& opts) {
  if (opts.key_override) {
    if (opts.key_override->size() != k)
      throw DimensionError("key override must be k bytes");
    return *opts.key_override;
  }
  std::vector<std::uint8_t> key(k);
  if (opts.key_seed) {
    std::mt19937_64 rng(splitmix64(*opts.key_seed));
    for (auto& b : key) b = static_cast<std::uint8_t>(rng() & 0xff);
  } else {
    std::random_device rd;
    for (auto& b : key) b = static_cast<std::uint8_t>(rd() & 0xff);
  }
  return key;
}

inline void record(PairingSession& s, bool outbound, const WireMessage& msg) {
  s.transcript.push_back({outbound, msg.msg_type, serialize(msg)});
}

inline void send_logged(PairingSession& s, Transport& t, const WireMessage& msg) {
  record(s, true, msg);
  send_message(t, msg);
}

inline WireMessage recv_logged(PairingSession& s, Transport& t,
                               std::chrono::milliseconds timeout) {
  WireMessage msg = recv_message(t, timeout);
  record(s, false, msg);
  return msg;
}

inline std::vector<std::uint8_t> encode_f32(const std::vector<double>& samples) {
  std::vector<std::uint8_t> out(samples.size() * 4);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const float f = static_cast<float>(samples[i]);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    out[4 * i] = static_cast<std::uint8_t>(bits);
    out[4 * i + 1] = static_cast<std::uint8_t>(bits >> 8);
    out[4 * i + 2] = static_cast<std::uint8_t>(bits >> 16);
    out[4 * i + 3] = static_cast<std::uint8_t>(bits >> 24);
  }
  return out;
}

inline std::vector<double> decode_f32(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() % 4 != 0) throw FormatError("snippet byte length not /4");
  std::vector<double> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint32_t bits = std::uint32_t(bytes[4 * i]) |
                               std::uint32_t(bytes[4 * i + 1]) << 8 |
                               std::uint32_t(bytes[4 * i + 2]) << 16 |
                               std::uint32_t(bytes[4 * i + 3]) << 24;
    float f;
    std::memcpy(&f, &bits, 4);
    out[i] = f;
  }
  return out;
}

// Offset of `haystack` maximizing the Pearson correlation with `needle`,
// computed with one FFT cross-correlation plus prefix sums.
inline std::pair<std::size_t, double> best_pearson_offset(
    const std::vector<double>& needle, const std::vector<double>& haystack) {
  const std::size_t L = needle.size();
  if (haystack.size() < L)
    throw InsufficientDataError("buffer shorter than sync snippet");
  const std::size_t n_offsets = haystack.size() - L + 1;

  std::size_t fft_n = 1;
  while (fft_n < haystack.size() + L) fft_n <<= 1;
  std::vector<std::complex<double>> a(fft_n), b(fft_n);
  for (std::size_t i = 0; i < haystack.size(); ++i) a[i] = haystack[i];
  for (std::size_t i = 0; i < L; ++i) b[i] = needle[L - 1 - i];  // reversed
  fft_inplace(a);
  fft_inplace(b);
  for (std::size_t i = 0; i < fft_n; ++i) a[i] *= b[i];
  fft_inplace(a, true);
  // cross[o] = sum_i needle[i] * haystack[o+i] lives at index o + L - 1
  auto cross = [&](std::size_t o) {
    return a[o + L - 1].real() / static_cast<double>(fft_n);
  };

  std::vector<double> prefix(haystack.size() + 1, 0.0);
  std::vector<double> prefix_sq(haystack.size() + 1, 0.0);
  for (std::size_t i = 0; i < haystack.size(); ++i) {
    prefix[i + 1] = prefix[i] + haystack[i];
    prefix_sq[i + 1] = prefix_sq[i] + haystack[i] * haystack[i];
  }
  double needle_sum = 0.0, needle_sq = 0.0;
  for (double v : needle) {
    needle_sum += v;
    needle_sq += v * v;
  }
  const double var_n = needle_sq - needle_sum * needle_sum / L;

  std::size_t best = 0;
  double best_r = -2.0;
  for (std::size_t o = 0; o < n_offsets; ++o) {
    const double seg_sum = prefix[o + L] - prefix[o];
    const double seg_sq = prefix_sq[o + L] - prefix_sq[o];
    const double var_h = seg_sq - seg_sum * seg_sum / L;
    if (var_n <= 0.0 || var_h <= 0.0) continue;
    const double cov = cross(o) - needle_sum * seg_sum / L;
    const double r = cov / std::sqrt(var_n * var_h);
    if (r > best_r) {
      best_r = r;
      best = o;
    }
  }
  return {best, best_r};
}

inline SampleBuffer window_from(const SampleBuffer& buf, std::size_t offset,
                                std::size_t len) {
  if (buf.size() < offset + len)
    throw InsufficientDataError("buffer too short for protocol window");
  SampleBuffer out;
  out.sample_rate_hz = buf.sample_rate_hz;
  out.source_id = buf.source_id;
  out.samples.assign(buf.samples.begin() + offset,
                     buf.samples.begin() + offset + len);
  return out;
}

inline BitSequence trevor_bits(const PairingConfig& cfg, const SampleBuffer& buf) {
  const auto X = build_observation_matrix(buf, cfg.spectral);
  const auto C = covariance(X);
  const auto basis = extract_basis(C, cfg.k_eigenvectors);
  return to_bits(trevor_quantize(basis));
}

inline BitSequence baseline_bits(const PairingConfig& cfg, const SampleBuffer& buf) {
  const auto X = build_observation_matrix(buf, cfg.spectral);
  return to_bits(schurmann_sigg_quantize(X));
}

inline void finish_rejected(PairingSession& s, const std::string& reason) {
  s.state = SessionState::rejected;
  s.reject_reason = reason;
}

// INIT handshake: both sides exchange config hashes; initiator speaks first.
// Returns false (session rejected) on mismatch.
inline bool handshake(const PairingConfig& cfg, PairingSession& session,
                      Transport& transport, const RunOptions& opts) {
  const Digest local_hash = cfg.config_hash();
  WireMessage init{MsgType::INIT, kWireVersion,
                   {local_hash.begin(), local_hash.end()}};
  auto check = [&](const WireMessage& msg) {
    if (msg.msg_type == MsgType::RESULT) {
      finish_rejected(session, "peer rejected during handshake");
      return false;
    }
    if (msg.msg_type != MsgType::INIT ||
        !std::equal(msg.body.begin(), msg.body.end(), local_hash.begin(),
                    local_hash.end())) {
      WireMessage reject{MsgType::RESULT, kWireVersion, {0}};
      send_logged(session, transport, reject);
      finish_rejected(session, "config hash mismatch");
      return false;
    }
    return true;
  };
  if (cfg.role == Role::initiator) {
    send_logged(session, transport, init);
    return check(recv_logged(session, transport, opts.timeout));
  }
  if (!check(recv_logged(session, transport, opts.timeout))) return false;
  send_logged(session, transport, init);
  return true;
}

// Commitment exchange shared by both protocol kinds. The initiator commits a
// fresh random key; the responder decommits and reports the outcome.
inline void reconcile(const PairingConfig& cfg, PairingSession& session,
                      Transport& transport, const RunOptions& opts) {
  if (cfg.role == Role::initiator) {
    const auto key = random_key(cfg.rs.k, opts);
    const auto commitment = commit(key, session.local_bits, cfg.rs);
    send_logged(session, transport,
                {MsgType::COMMIT, kWireVersion, commitment.serialize()});
    session.state = SessionState::committed;
    const auto result = recv_logged(session, transport, opts.timeout);
    if (result.msg_type != MsgType::RESULT)
      throw ProtocolError("expected RESULT message");
    if (result.body.size() == 1 && result.body[0] == 1) {
      session.derived_key = key;
      session.state = SessionState::verified;
    } else {
      finish_rejected(session, "peer failed to decommit");
    }
  } else {
    const auto msg = recv_logged(session, transport, opts.timeout);
    if (msg.msg_type != MsgType::COMMIT)
      throw ProtocolError("expected COMMIT message");
    session.state = SessionState::committed;
    const auto commitment = FuzzyCommitment::deserialize(msg.body);
    std::optional<std::vector<std::uint8_t>> key;
    if (commitment.params.n == cfg.rs.n && commitment.params.k == cfg.rs.k)
      key = decommit(commitment, session.local_bits);
    WireMessage result{MsgType::RESULT, kWireVersion,
                       {static_cast<std::uint8_t>(key ? 1 : 0)}};
    send_logged(session, transport, result);
    if (key) {
      session.derived_key = std::move(key);
      session.state = SessionState::verified;
    } else {
      finish_rejected(session, "decommit failed");
    }
  }
}

}  // namespace detail

// Two-message pairing: INIT handshake, then a single fuzzy commitment. No
// signal-derived data other than the commitment crosses the transport.
inline PairingSession run_pairing(const PairingConfig& cfg,
                                  const SampleBuffer& signal, Transport& transport,
                                  const RunOptions& opts = {}) {
  cfg.validate();
  if (cfg.protocol_kind != ProtocolKind::trevor)
    throw ConfigError("run_pairing requires protocol_kind = trevor");
  PairingSession session;
  try {
    session.state = SessionState::sampling;
    if (!detail::handshake(cfg, session, transport, opts)) return session;

    const std::size_t window = cfg.spectral.block_len_d * cfg.spectral.min_rows;
    session.local_bits =
        detail::trevor_bits(cfg, detail::window_from(signal, 0, window));
    session.state = SessionState::quantized;

    detail::reconcile(cfg, session, transport, opts);
  } catch (const TransportTimeout&) {
    detail::finish_rejected(session, "transport timeout");
  } catch (const InsufficientDataError& e) {
    detail::finish_rejected(session, e.what());
  } catch (const DegenerateInputError& e) {
    detail::finish_rejected(session, e.what());
  }
  return session;
}

// Baseline synchronization-based protocol: the initiator broadcasts the first
// 0.25 s of raw samples as a SYNC_SNIPPET, the responder aligns by maximum
// Pearson correlation, then both quantize with Schurmann-Sigg and reconcile.
// The snippet leak is intentional; this protocol is SyncBleed's target.
inline PairingSession run_sync_baseline(const PairingConfig& cfg,
                                        const SampleBuffer& signal,
                                        Transport& transport,
                                        const RunOptions& opts = {}) {
  cfg.validate();
  if (cfg.protocol_kind != ProtocolKind::sync_baseline)
    throw ConfigError("run_sync_baseline requires protocol_kind = sync_baseline");
  PairingSession session;
  try {
    session.state = SessionState::sampling;
    if (!detail::handshake(cfg, session, transport, opts)) return session;

    const std::size_t snippet_len = signal.sample_rate_hz / 4;  // 0.25 s
    const std::size_t window = cfg.spectral.block_len_d * cfg.spectral.min_rows;
    std::size_t offset = 0;

    if (cfg.role == Role::initiator) {
      if (signal.size() < snippet_len)
        throw InsufficientDataError("signal shorter than the 0.25 s sync snippet");
      const std::vector<double> snippet(signal.samples.begin(),
                                        signal.samples.begin() + snippet_len);
      detail::send_logged(
          session, transport,
          {MsgType::SYNC_SNIPPET, kWireVersion, detail::encode_f32(snippet)});
    } else {
      const auto msg = detail::recv_logged(session, transport, opts.timeout);
      if (msg.msg_type != MsgType::SYNC_SNIPPET)
        throw ProtocolError("expected SYNC_SNIPPET message");
      const auto snippet = detail::decode_f32(msg.body);
      const auto [best, r] = detail::best_pearson_offset(snippet, signal.samples);
      if (r < 0.5) {
        WireMessage reject{MsgType::RESULT, kWireVersion, {0}};
        detail::send_logged(session, transport, reject);
        detail::finish_rejected(session, "alignment failure (peak correlation " +
                                             std::to_string(r) + ")");
        return session;
      }
      offset = best;
    }

    session.local_bits =
        detail::baseline_bits(cfg, detail::window_from(signal, offset, window));
    session.state = SessionState::quantized;

    detail::reconcile(cfg, session, transport, opts);
  } catch (const TransportTimeout&) {
    detail::finish_rejected(session, "transport timeout");
  } catch (const InsufficientDataError& e) {
    detail::finish_rejected(session, e.what());
  } catch (const DegenerateInputError& e) {
    detail::finish_rejected(session, e.what());
  }
  return session;
}

// Runs both roles of one pairing over an in-process loopback transport and
// returns (initiator session, responder session).
inline std::pair<PairingSession, PairingSession> run_loopback(
    const PairingConfig& cfg, const SampleBuffer& initiator_signal,
    const SampleBuffer& responder_signal, const RunOptions& opts = {}) {
  PairingConfig cfg_init = cfg;
  cfg_init.role = Role::initiator;
  PairingConfig cfg_resp = cfg;
  cfg_resp.role = Role::responder;

  auto [t_init, t_resp] = make_loopback_pair();
  auto run = (cfg.protocol_kind == ProtocolKind::trevor) ? run_pairing
                                                         : run_sync_baseline;

  PairingSession responder;
  std::thread worker([&] {
    RunOptions resp_opts = opts;
    resp_opts.key_override.reset();
    resp_opts.key_seed.reset();
    responder = run(cfg_resp, responder_signal, *t_resp, resp_opts);
  });
  PairingSession initiator = run(cfg_init, initiator_signal, *t_init, opts);
  worker.join();
  return {std::move(initiator), std::move(responder)};
}

}  // namespace trevor
