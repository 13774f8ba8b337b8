#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "trevor/commitment.hpp"
#include "trevor/environment.hpp"
#include "trevor/errors.hpp"
#include "trevor/fft.hpp"
#include "trevor/protocol.hpp"
#include "trevor/quantize.hpp"
#include "trevor/signal.hpp"

namespace trevor {

// Estimated wall transfer function: per-bin complex gains for positive
// frequencies of an fft_len-point transform.
struct TransferEstimate {
  std::vector<std::complex<double>> gains;
  std::size_t fft_len = 0;
  double regularizer_eps = 0.0;
  std::size_t training_pairs = 0;
};

struct AttackReport {
  double ber_without_attack = 0.0;
  double ber_with_attack = 0.0;
  std::size_t trials = 0;
  std::size_t reconciliation_successes = 0;
  // Per-trial rates, in trial order, for CDF output.
  std::vector<double> per_trial_without;
  std::vector<double> per_trial_with;
};

namespace detail {

inline std::vector<std::complex<double>> padded_rfft(
    const std::vector<double>& samples, std::size_t fft_len) {
  std::vector<double> block(fft_len, 0.0);
  const std::size_t n = std::min(samples.size(), fft_len);
  std::copy(samples.begin(), samples.begin() + n, block.begin());
  return rfft(block);
}

inline double mean_bin_power(const std::vector<SampleBuffer>& snippets,
                             std::size_t fft_len) {
  double acc = 0.0;
  std::size_t count = 0;
  for (const auto& s : snippets) {
    for (const auto& bin : padded_rfft(s.samples, fft_len)) {
      acc += std::norm(bin);
      ++count;
    }
  }
  return count ? acc / static_cast<double>(count) : 0.0;
}

}  // namespace detail

// Per-bin regularized least squares over time-paired training snippets for
// the forward wall response A = H * L:
// H[w] = sum_i A_i(w) conj(L_i(w)) / (sum_i |L_i(w)|^2 + eps).
inline TransferEstimate fit_transfer(const std::vector<SampleBuffer>& leg_snippets,
                                     const std::vector<SampleBuffer>& adv_snippets,
                                     std::size_t fft_len, double eps) {
  if (leg_snippets.empty() || adv_snippets.empty())
    throw InsufficientDataError("transfer fit needs at least one training pair");
  if (leg_snippets.size() != adv_snippets.size())
    throw DimensionError("training lists differ in length");
  if (eps <= 0.0) throw ConfigError("regularizer eps must be > 0");
  if (!is_power_of_two(fft_len))
    throw ConfigError("fft_len must be a power of two");

  const std::size_t n_bins = fft_len / 2 + 1;
  std::vector<std::complex<double>> num(n_bins, 0.0);
  std::vector<double> den(n_bins, 0.0);
  for (std::size_t i = 0; i < leg_snippets.size(); ++i) {
    const auto L = detail::padded_rfft(leg_snippets[i].samples, fft_len);
    const auto A = detail::padded_rfft(adv_snippets[i].samples, fft_len);
    for (std::size_t w = 0; w < n_bins; ++w) {
      num[w] += A[w] * std::conj(L[w]);
      den[w] += std::norm(L[w]);
    }
  }

  TransferEstimate est;
  est.fft_len = fft_len;
  est.regularizer_eps = eps;
  est.training_pairs = leg_snippets.size();
  est.gains.resize(n_bins);
  for (std::size_t w = 0; w < n_bins; ++w) est.gains[w] = num[w] / (den[w] + eps);
  return est;
}

// Blockwise Wiener inverse with a Hann window at 50% overlap:
// E(w) = M(w) conj(H) / (|H|^2 + eps), inverse transformed and overlap-added.
// Output length equals input length.
inline SampleBuffer apply_inverse(const TransferEstimate& est,
                                  const SampleBuffer& muffled) {
  if (est.gains.size() != est.fft_len / 2 + 1)
    throw DimensionError("transfer estimate not fitted");
  const std::size_t n = est.fft_len;
  const std::size_t hop = n / 2;
  const std::size_t len = muffled.size();

  std::vector<double> window(n);
  for (std::size_t i = 0; i < n; ++i)
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);

  std::vector<double> out(len, 0.0), wsum(len, 0.0);
  std::vector<double> block(n);
  for (std::size_t start = 0; start < len; start += hop) {
    std::fill(block.begin(), block.end(), 0.0);
    const std::size_t avail = std::min(n, len - start);
    for (std::size_t i = 0; i < avail; ++i)
      block[i] = muffled.samples[start + i] * window[i];
    auto spec = rfft(block);
    for (std::size_t w = 0; w < spec.size(); ++w)
      spec[w] = spec[w] * std::conj(est.gains[w]) /
                (std::norm(est.gains[w]) + est.regularizer_eps);
    const auto rec = irfft(spec, n);
    for (std::size_t i = 0; i < avail; ++i) {
      out[start + i] += rec[i];
      wsum[start + i] += window[i];
    }
  }
  for (std::size_t i = 0; i < len; ++i)
    if (wsum[i] > 1e-12) out[i] /= wsum[i];

  SampleBuffer result;
  result.samples = std::move(out);
  result.sample_rate_hz = muffled.sample_rate_hz;
  result.source_id = muffled.source_id + ":reconstructed";
  return result;
}

// Decommit attempt with the adversary's estimated symbols. search_radius > 0
// additionally tries every single-byte (radius 1) modification of the mask.
inline bool local_reconciliation_check(const BitSequence& est_bits,
                                       const FuzzyCommitment& snooped,
                                       std::size_t search_radius = 0) {
  if (decommit(snooped, est_bits)) return true;
  if (search_radius == 0) return false;
  BitSequence probe = est_bits;
  for (std::size_t pos = 0; pos < snooped.params.n; ++pos) {
    const std::uint8_t original = probe.bytes[pos];
    for (int v = 1; v < 256; ++v) {
      probe.bytes[pos] = static_cast<std::uint8_t>(original ^ v);
      if (decommit(snooped, probe)) return true;
    }
    probe.bytes[pos] = original;
  }
  return false;
}

struct AttackConfig {
  PairingConfig pairing;  // must be sync_baseline for the attack to train
  std::size_t fft_len = 2048;
  double eps_rel = 1e-3;
  std::size_t search_radius = 0;

  AttackConfig() { pairing.protocol_kind = ProtocolKind::sync_baseline; }
};

namespace detail {

struct SnoopedRound {
  std::vector<double> snippet;         // broadcast sync snippet
  FuzzyCommitment commitment;          // broadcast reconciliation message
  BitSequence legit_bits;              // initiator's local bits (ground truth)
  SampleBuffer adversary_recording;    // muffled audio at the adversary
  bool have_snippet = false;
  bool verified = false;
};

inline SnoopedRound snoop_round(const EnvironmentSpec& base,
                                std::uint64_t epoch_seed,
                                const AttackConfig& cfg) {
  EnvironmentSpec epoch = base;
  epoch.seed = epoch_seed;
  const auto env = synthesize_environment(epoch);
  const auto& a = env[0].second;
  const auto& b = env[1].second;

  const SampleBuffer* adversary = nullptr;
  for (const auto& [id, buf] : env)
    if (id == "adversary") adversary = &buf;
  if (!adversary) adversary = &env.back().second;

  RunOptions opts;
  opts.key_seed = splitmix64(epoch_seed ^ 0x5eedULL);
  auto [init, resp] = run_loopback(cfg.pairing, a, b, opts);

  SnoopedRound round;
  round.legit_bits = init.local_bits;
  round.verified = init.verified();
  round.adversary_recording = *adversary;
  for (const auto& entry : init.transcript) {
    if (entry.type == MsgType::SYNC_SNIPPET) {
      const auto msg = deserialize(entry.frame);
      round.snippet = decode_f32(msg.body);
      round.have_snippet = true;
    } else if (entry.type == MsgType::COMMIT && entry.outbound) {
      const auto msg = deserialize(entry.frame);
      round.commitment = FuzzyCommitment::deserialize(msg.body);
    }
  }
  return round;
}

// Quantize `signal` at the offset found by correlating the snippet against
// `align_against`. Alignment runs on the raw muffled recording even when the
// quantized signal is a reconstruction: the Wiener overlap-add output is
// unreliable in its first block, but the two buffers share a time base.
inline BitSequence adversary_bits(const AttackConfig& cfg,
                                  const std::vector<double>& snippet,
                                  const SampleBuffer& align_against,
                                  const SampleBuffer& signal) {
  const auto [offset, r] = best_pearson_offset(snippet, align_against.samples);
  (void)r;  // the adversary takes its best guess even on a weak peak
  const std::size_t window =
      cfg.pairing.spectral.block_len_d * cfg.pairing.spectral.min_rows;
  // A weak peak near the end of the recording cannot anchor a full window;
  // clamp so the quantizer always sees one.
  const std::size_t max_offset =
      signal.size() > window ? signal.size() - window : 0;
  const auto buf = window_from(signal, std::min(offset, max_offset), window);
  return to_bits(
      schurmann_sigg_quantize(build_observation_matrix(buf, cfg.pairing.spectral)));
}

}  // namespace detail

// Full SyncBleed run: phase 1 snoops training_rounds sync snippets and fits
// the transfer estimate; phase 2 reconstructs the in-room signal for
// attack_rounds fresh keys and measures BER with and without the attack.
inline AttackReport run_attack(const EnvironmentSpec& env,
                               std::size_t training_rounds,
                               std::size_t attack_rounds,
                               const AttackConfig& cfg = {}) {
  env.validate();
  if (env.devices.size() < 3)
    throw ConfigError("attack environment needs a legitimate pair plus adversary");

  // Phase 1: training set from snooped snippets + muffled recordings.
  std::vector<SampleBuffer> leg_train, adv_train;
  for (std::size_t r = 0; r < training_rounds; ++r) {
    const auto round =
        detail::snoop_round(env, env.seed ^ detail::splitmix64(r + 1), cfg);
    if (!round.have_snippet) continue;
    SampleBuffer leg;
    leg.samples = round.snippet;
    leg.sample_rate_hz = env.sample_rate_hz;
    leg.source_id = "snooped";
    SampleBuffer adv;
    adv.samples.assign(
        round.adversary_recording.samples.begin(),
        round.adversary_recording.samples.begin() +
            std::min(round.snippet.size(), round.adversary_recording.size()));
    adv.sample_rate_hz = env.sample_rate_hz;
    adv.source_id = "muffled";
    leg_train.push_back(std::move(leg));
    adv_train.push_back(std::move(adv));
  }
  const double eps = cfg.eps_rel * detail::mean_bin_power(leg_train, cfg.fft_len);
  const auto est =
      fit_transfer(leg_train, adv_train, cfg.fft_len, eps > 0.0 ? eps : 1e-12);

  // Phase 2: fresh keys, reconstruct, quantize, and try reconciliation.
  AttackReport report;
  report.trials = attack_rounds;
  for (std::size_t r = 0; r < attack_rounds; ++r) {
    const auto round = detail::snoop_round(
        env, env.seed ^ detail::splitmix64(0x10000 + training_rounds + r), cfg);
    if (!round.have_snippet) continue;

    const auto raw_bits = detail::adversary_bits(
        cfg, round.snippet, round.adversary_recording, round.adversary_recording);
    const auto reconstructed = apply_inverse(est, round.adversary_recording);
    const auto attacked_bits = detail::adversary_bits(
        cfg, round.snippet, round.adversary_recording, reconstructed);

    const double ber_raw = bit_error_rate(raw_bits, round.legit_bits);
    const double ber_attacked = bit_error_rate(attacked_bits, round.legit_bits);
    report.per_trial_without.push_back(ber_raw);
    report.per_trial_with.push_back(ber_attacked);
    report.ber_without_attack += ber_raw;
    report.ber_with_attack += ber_attacked;
    if (local_reconciliation_check(attacked_bits, round.commitment,
                                   cfg.search_radius))
      ++report.reconciliation_successes;
  }
  if (!report.per_trial_with.empty()) {
    report.ber_without_attack /= static_cast<double>(report.per_trial_without.size());
    report.ber_with_attack /= static_cast<double>(report.per_trial_with.size());
  }
  return report;
}

}  // namespace trevor
