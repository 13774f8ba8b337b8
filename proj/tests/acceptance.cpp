// Acceptance harness: one pass/fail line per criterion, exit 0 iff all pass.
// Criterion 10 needs the CLI binary path as argv[1].
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "oracles.hpp"
#include "trevor/commitment.hpp"
#include "trevor/environment.hpp"
#include "trevor/nist.hpp"
#include "trevor/protocol.hpp"
#include "trevor/quantize.hpp"
#include "trevor/reed_solomon.hpp"
#include "trevor/spectral.hpp"
#include "trevor/syncbleed.hpp"

using namespace trevor;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// --------------------------------------------------------------- criterion 1

Outcome criterion_fft_oracle() {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> dist(0.0, 1.0);
  double worst = 0.0;
  for (std::size_t d : {8u, 16u, 32u, 64u}) {
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> block(d);
      for (double& v : block) v = dist(rng);
      const auto prod = block_fft_magnitude(block);
      const auto ref = oracle::dft_magnitude(block);
      if (prod.size() != ref.size())
        return {false, "bin count mismatch at d=" + std::to_string(d)};
      for (std::size_t i = 0; i < ref.size(); ++i) {
        const double rel =
            std::abs(prod[i] - ref[i]) / std::max(std::abs(ref[i]), 1.0);
        worst = std::max(worst, rel);
      }
    }
  }
  std::ostringstream os;
  os << "max relative error " << worst;
  return {worst <= 1e-9, os.str()};
}

// --------------------------------------------------------------- criterion 2

Outcome criterion_eigen_oracle() {
  std::mt19937_64 rng(2);
  double worst_val = 0.0, worst_vec = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto A = oracle::random_psd(32, rng);
    CovarianceMatrix C;
    C.m = 32;
    C.entries.reserve(32 * 32);
    for (const auto& row : A)
      C.entries.insert(C.entries.end(), row.begin(), row.end());
    // tighter-than-default power iteration so the comparison is limited by
    // the oracle, not by early stopping near close eigenvalues
    const auto basis = extract_basis(C, 6, 1e-13, 100000);
    const auto ref = oracle::jacobi_eigen(A);
    const double scale = std::max(std::abs(ref.values[0]), 1.0);
    for (std::size_t i = 0; i < 6; ++i) {
      worst_val = std::max(
          worst_val, std::abs(basis.pairs[i].value - ref.values[i]) / scale);
      for (std::size_t j = 0; j < 32; ++j)
        worst_vec = std::max(
            worst_vec, std::abs(basis.pairs[i].vector[j] - ref.vectors[i][j]));
    }
  }
  std::ostringstream os;
  os << "max eigenvalue error " << worst_val << ", max component error "
     << worst_vec;
  return {worst_val <= 1e-6 && worst_vec <= 1e-5, os.str()};
}

// --------------------------------------------------------------- criterion 3

Outcome criterion_rs_boundary() {
  std::mt19937_64 rng(3);
  const RsParams small{15, 11};
  std::vector<std::uint8_t> data(small.k);
  for (auto& b : data) b = static_cast<std::uint8_t>(rng() & 0xff);
  const auto cw = rs_encode(data, small);

  // exhaustive single-symbol errors
  for (std::size_t i = 0; i < small.n; ++i)
    for (int v = 1; v < 256; ++v) {
      auto word = cw;
      word[i] = static_cast<std::uint8_t>(word[i] ^ v);
      const auto dec = rs_decode(word, small);
      if (!dec || *dec != data)
        return {false, "1-error pattern failed at position " + std::to_string(i)};
    }

  // exhaustive double-symbol errors
  for (std::size_t i = 0; i < small.n; ++i)
    for (std::size_t j = i + 1; j < small.n; ++j)
      for (int vi = 1; vi < 256; ++vi)
        for (int vj = 1; vj < 256; ++vj) {
          auto word = cw;
          word[i] = static_cast<std::uint8_t>(word[i] ^ vi);
          word[j] = static_cast<std::uint8_t>(word[j] ^ vj);
          const auto dec = rs_decode(word, small);
          if (!dec || *dec != data)
            return {false, "2-error pattern failed at (" + std::to_string(i) +
                               "," + std::to_string(j) + ")"};
        }

  // sampled 3-error patterns through the commitment: never silently verify
  BitSequence witness;
  for (int i = 0; i < 8 * 15; ++i) witness.push_bit(rng() & 1);
  const auto commitment = commit(data, witness, small);
  std::size_t decode_hits = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    BitSequence probe = witness;
    std::size_t pos[3];
    pos[0] = rng() % 15;
    do pos[1] = rng() % 15; while (pos[1] == pos[0]);
    do pos[2] = rng() % 15; while (pos[2] == pos[0] || pos[2] == pos[1]);
    for (std::size_t p : pos)
      probe.bytes[p] ^= static_cast<std::uint8_t>(1 + rng() % 255);
    auto word = commitment.payload_e;
    for (std::size_t i = 0; i < small.n; ++i) word[i] ^= probe.bytes[i];
    if (rs_decode(word, small)) ++decode_hits;
    if (decommit(commitment, probe))
      return {false, "3-error pattern silently verified"};
  }

  // full-length code: random error weights up to and just past t = 32
  const RsParams big{255, 191};
  std::vector<std::uint8_t> big_data(big.k);
  for (auto& b : big_data) b = static_cast<std::uint8_t>(rng() & 0xff);
  const auto big_cw = rs_encode(big_data, big);
  auto corrupt = [&](std::size_t n_errors) {
    auto word = big_cw;
    std::unordered_set<std::size_t> used;
    while (used.size() < n_errors) {
      const std::size_t p = rng() % big.n;
      if (!used.insert(p).second) continue;
      word[p] = static_cast<std::uint8_t>(word[p] ^ (1 + rng() % 255));
    }
    return word;
  };
  for (int trial = 0; trial < 10000; ++trial) {
    const auto dec = rs_decode(corrupt(1 + rng() % 32), big);
    if (!dec || *dec != big_data)
      return {false, "<=32-error trial failed to decode"};
  }
  std::size_t bad_verifies = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const auto dec = rs_decode(corrupt(33), big);
    if (dec && *dec == big_data) ++bad_verifies;
  }
  std::ostringstream os;
  os << "3-error raw decodes caught by digest: " << decode_hits
     << "/2000, 33-error verifies " << bad_verifies << "/10000";
  return {bad_verifies == 0, os.str()};
}

// --------------------------------------------------------------- criterion 4

Outcome criterion_shift_tolerance() {
  PairingConfig cfg;
  const std::size_t window = cfg.spectral.block_len_d * cfg.spectral.min_rows;
  const std::size_t max_shift = 96000, step = 2400;  // 0..2 s, 50 ms steps
  EnvironmentSpec spec;
  spec.source_kind = SourceKind::harmonic_mixture;
  spec.sample_rate_hz = 48000;
  spec.duration_s = static_cast<double>(window + max_shift + 100) / 48000.0;
  ChannelModel legit;
  legit.snr_db = 20.0;
  spec.devices = {{"a", legit}, {"b", legit}};

  std::vector<std::size_t> shifts;
  for (std::size_t s = 0; s <= max_shift; s += step) shifts.push_back(s);
  std::vector<double> trevor_ber(shifts.size(), 0.0), means_ber(shifts.size(), 0.0),
      ss_ber(shifts.size(), 0.0);
  const int trials = 20;
  for (int tr = 0; tr < trials; ++tr) {
    spec.seed = 100 + tr;
    const auto env = synthesize_environment(spec);
    const auto wa = detail::window_from(env[0].second, 0, window);
    const auto ta = detail::trevor_bits(cfg, wa);
    const auto ma = to_bits(means_quantize(wa, cfg.spectral.block_len_d));
    const auto sa =
        to_bits(schurmann_sigg_quantize(build_observation_matrix(wa, cfg.spectral)));
    for (std::size_t si = 0; si < shifts.size(); ++si) {
      const auto wb = detail::window_from(env[1].second, shifts[si], window);
      trevor_ber[si] += bit_error_rate(ta, detail::trevor_bits(cfg, wb));
      means_ber[si] +=
          bit_error_rate(ma, to_bits(means_quantize(wb, cfg.spectral.block_len_d)));
      ss_ber[si] += bit_error_rate(
          sa, to_bits(schurmann_sigg_quantize(
                  build_observation_matrix(wb, cfg.spectral))));
    }
  }
  double worst_trevor = 0.0, worst_baseline = 1.0;
  for (std::size_t si = 0; si < shifts.size(); ++si) {
    worst_trevor = std::max(worst_trevor, trevor_ber[si] / trials);
    if (shifts[si] >= 1200) {  // >= 25 ms
      worst_baseline = std::min(worst_baseline, means_ber[si] / trials);
      worst_baseline = std::min(worst_baseline, ss_ber[si] / trials);
    }
  }
  std::ostringstream os;
  os << "trevor max BER " << worst_trevor << ", baseline min BER "
     << worst_baseline;
  return {worst_trevor <= 0.15 && worst_baseline > 0.25, os.str()};
}

// --------------------------------------------------------------- criterion 5

Outcome criterion_pairing_success() {
  PairingConfig cfg;
  cfg.rs = RsParams{32, 8};
  const std::size_t window = cfg.spectral.block_len_d * cfg.spectral.min_rows;
  EnvironmentSpec spec;
  spec.source_kind = SourceKind::harmonic_mixture;
  spec.sample_rate_hz = 48000;
  const std::size_t shift = 2400;  // 50 ms
  spec.duration_s = static_cast<double>(window + shift + 100) / 48000.0;
  ChannelModel legit;
  legit.snr_db = 20.0;
  ChannelModel legit_shifted = legit;
  legit_shifted.delay_samples = shift;
  ChannelModel adversary;
  adversary.snr_db = 5.0;
  adversary.fir_taps = detail::lowpass_taps(2000.0 / spec.sample_rate_hz);
  spec.devices = {{"alice", legit}, {"bob", legit_shifted}, {"adversary", adversary}};

  int legit_ok = 0, adv_ok = 0;
  for (int t = 0; t < 100; ++t) {
    spec.seed = 1000 + t;
    const auto env = synthesize_environment(spec);
    RunOptions opts;
    opts.key_seed = 42u + t;
    const auto [i1, r1] = run_loopback(cfg, env[0].second, env[1].second, opts);
    legit_ok += (i1.verified() && r1.verified()) ? 1 : 0;
    const auto [i2, r2] = run_loopback(cfg, env[0].second, env[2].second, opts);
    adv_ok += r2.verified() ? 1 : 0;
  }
  std::ostringstream os;
  os << "legitimate " << legit_ok << "/100, adversary " << adv_ok << "/100";
  return {legit_ok >= 90 && adv_ok == 0, os.str()};
}

// --------------------------------------------------------------- criterion 6

Outcome criterion_replay() {
  PairingConfig cfg;
  const std::size_t window = cfg.spectral.block_len_d * cfg.spectral.min_rows;
  EnvironmentSpec spec;
  spec.source_kind = SourceKind::filtered_noise;
  spec.sample_rate_hz = 8000;
  spec.duration_s = static_cast<double>(window + 100) / 8000.0;
  ChannelModel legit;
  legit.snr_db = 20.0;
  spec.devices = {{"alice", legit}, {"bob", legit}};

  int replay_ok = 0;
  double ber_sum = 0.0;
  for (int t = 0; t < 100; ++t) {
    spec.seed = 1000 + t;
    EnvironmentSpec old = spec;
    old.seed = spec.seed ^ 0x9999;
    const auto live = synthesize_environment(spec);
    const auto recorded = synthesize_environment(old);
    RunOptions opts;
    opts.key_seed = 42u + t;
    const auto [init, resp] =
        run_loopback(cfg, live[0].second, recorded[1].second, opts);
    replay_ok += resp.verified() ? 1 : 0;
    ber_sum += bit_error_rate(init.local_bits, resp.local_bits);
  }
  const double mean_ber = ber_sum / 100.0;
  std::ostringstream os;
  os << "replay mean BER " << mean_ber << ", successes " << replay_ok << "/100";
  return {mean_ber >= 0.45 && mean_ber <= 0.55 && replay_ok == 0, os.str()};
}

// --------------------------------------------------------------- criterion 7

Outcome criterion_syncbleed() {
  EnvironmentSpec spec;
  spec.source_kind = SourceKind::filtered_noise;
  spec.sample_rate_hz = 8000;
  AttackConfig cfg;
  cfg.pairing.rs = RsParams{32, 4};
  const std::size_t window =
      cfg.pairing.spectral.block_len_d * cfg.pairing.spectral.min_rows;
  spec.duration_s = static_cast<double>(window + 500) / spec.sample_rate_hz;
  spec.seed = 321;
  ChannelModel legit;
  legit.snr_db = 20.0;
  ChannelModel wall;  // multipath comb: direct path plus four echoes
  wall.snr_db = 30.0;
  wall.fir_taps.assign(65, 0.0);
  wall.fir_taps[0] = 1.0;
  wall.fir_taps[16] = 0.75;
  wall.fir_taps[32] = 0.65;
  wall.fir_taps[48] = 0.55;
  wall.fir_taps[64] = 0.45;
  spec.devices = {{"alice", legit}, {"bob", legit}, {"adversary", wall}};

  const auto report = run_attack(spec, 256, 100, cfg);
  const double drop = report.ber_without_attack - report.ber_with_attack;
  const double correctable =
      static_cast<double>(cfg.pairing.rs.t()) / static_cast<double>(cfg.pairing.rs.n);
  bool pass = drop >= 0.10;
  if (correctable > report.ber_with_attack)
    pass = pass && report.reconciliation_successes >= 1;

  // trevor never broadcasts a sync snippet
  PairingConfig tcfg;
  EnvironmentSpec tspec = spec;
  tspec.devices = {{"alice", legit}, {"bob", legit}};
  std::size_t snippet_frames = 0;
  for (int t = 0; t < 100; ++t) {
    tspec.seed = 9000 + t;
    const auto env = synthesize_environment(tspec);
    RunOptions opts;
    opts.key_seed = 7u + t;
    const auto [init, resp] = run_loopback(tcfg, env[0].second, env[1].second, opts);
    for (const auto* s : {&init, &resp})
      for (const auto& entry : s->transcript)
        if (entry.type == MsgType::SYNC_SNIPPET) ++snippet_frames;
  }
  pass = pass && snippet_frames == 0;

  std::ostringstream os;
  os << "BER " << report.ber_without_attack << " -> " << report.ber_with_attack
     << " (drop " << drop << "), reconciliation "
     << report.reconciliation_successes << "/" << report.trials
     << ", trevor snippet frames " << snippet_frames << "/100 transcripts";
  return {pass, os.str()};
}

// --------------------------------------------------------------- criterion 8

std::vector<std::uint8_t> f64_bytes(const std::vector<double>& samples) {
  std::vector<std::uint8_t> out(samples.size() * 8);
  std::memcpy(out.data(), samples.data(), out.size());
  return out;
}

std::uint64_t load64(const std::uint8_t* p) {
  std::uint64_t v;
  std::memcpy(&v, p, 8);
  return v;
}

Outcome criterion_zero_leak() {
  PairingConfig cfg;
  const std::size_t window = cfg.spectral.block_len_d * cfg.spectral.min_rows;
  EnvironmentSpec spec;
  spec.source_kind = SourceKind::filtered_noise;
  spec.sample_rate_hz = 8000;
  spec.duration_s = static_cast<double>(window + 100) / 8000.0;
  spec.seed = 4242;
  ChannelModel legit;
  legit.snr_db = 20.0;
  spec.devices = {{"alice", legit}, {"bob", legit}};
  const auto env = synthesize_environment(spec);
  const auto& buf = env[0].second;

  // every 8-byte window of the raw samples, in both wire-plausible encodings
  std::vector<std::vector<std::uint8_t>> encodings;
  for (const auto& [id, b] : env) {
    encodings.push_back(detail::encode_f32(b.samples));
    encodings.push_back(f64_bytes(b.samples));
  }
  std::unordered_set<std::uint64_t> sample_windows;
  for (const auto& enc : encodings)
    for (std::size_t i = 0; i + 8 <= enc.size(); ++i)
      sample_windows.insert(load64(enc.data() + i));

  std::vector<std::vector<TranscriptEntry>> transcripts;
  for (int run = 0; run < 50; ++run) {
    RunOptions opts;
    opts.key_seed = 1000u + run;
    const auto [init, resp] = run_loopback(cfg, buf, buf, opts);
    if (!init.verified() || !resp.verified())
      return {false, "fixed-signal pairing rejected on run " + std::to_string(run)};
    transcripts.push_back(init.transcript);
    transcripts.push_back(resp.transcript);
  }

  // transcripts differ only in the COMMIT frame across runs
  const auto& ref_i = transcripts[0];
  const auto& ref_r = transcripts[1];
  for (std::size_t run = 1; run < 50; ++run) {
    for (int side = 0; side < 2; ++side) {
      const auto& ref = side == 0 ? ref_i : ref_r;
      const auto& cur = transcripts[2 * run + side];
      if (cur.size() != ref.size())
        return {false, "transcript length varies with R"};
      for (std::size_t e = 0; e < cur.size(); ++e) {
        if (cur[e].type != ref[e].type || cur[e].outbound != ref[e].outbound)
          return {false, "transcript structure varies with R"};
        if (cur[e].type == MsgType::COMMIT) {
          if (cur[e].frame.size() != ref[e].frame.size())
            return {false, "commitment frame length varies with R"};
        } else if (cur[e].frame != ref[e].frame) {
          return {false, "non-commitment frame varies with R"};
        }
      }
    }
  }

  // taint scan: no >= 16 consecutive raw sample bytes in any frame
  std::size_t scanned = 0;
  for (const auto& transcript : transcripts)
    for (const auto& entry : transcript) {
      const auto& frame = entry.frame;
      ++scanned;
      for (std::size_t i = 0; i + 16 <= frame.size(); ++i) {
        if (!sample_windows.count(load64(frame.data() + i))) continue;
        // confirm the full 16-byte run against each encoding
        for (const auto& enc : encodings) {
          const auto it = std::search(enc.begin(), enc.end(), frame.begin() + i,
                                      frame.begin() + i + 16);
          if (it != enc.end())
            return {false, "frame contains 16 raw sample bytes"};
        }
      }
    }
  std::ostringstream os;
  os << "50 runs, " << scanned << " frames scanned, only COMMIT payloads vary";
  return {true, os.str()};
}

// --------------------------------------------------------------- criterion 9

Outcome criterion_randomness() {
  PairingConfig cfg;
  const std::size_t window = cfg.spectral.block_len_d * cfg.spectral.min_rows;
  EnvironmentSpec spec;
  spec.source_kind = SourceKind::filtered_noise;
  spec.sample_rate_hz = 8000;
  spec.duration_s = static_cast<double>(window + 100) / 8000.0;
  ChannelModel legit;
  legit.snr_db = 20.0;
  spec.devices = {{"a", legit}, {"b", legit}};

  std::vector<BitSequence> keys;
  for (int t = 0; t < 100; ++t) {
    spec.seed = 5000 + t;
    const auto env = synthesize_environment(spec);
    keys.push_back(
        detail::trevor_bits(cfg, detail::window_from(env[0].second, 0, window)));
  }
  const auto suite = run_suite(keys);

  // calibration: uniform bits must reject at the nominal alpha = 1% +/- 1.5%
  std::mt19937_64 rng(99);
  std::size_t rejects = 0, evaluations = 0;
  for (int t = 0; t < 2000; ++t) {
    BitSequence bits;
    for (int i = 0; i < 256; ++i) bits.push_bit(rng() & 1);
    const auto report = run_tests(bits);
    for (const auto& [name, result] : report.per_test) {
      ++evaluations;
      rejects += result.pass ? 0 : 1;
    }
  }
  const double reject_rate =
      static_cast<double>(rejects) / static_cast<double>(evaluations);
  const bool calibrated = reject_rate <= 0.025;

  std::ostringstream os;
  os << "fractions";
  bool all_pass = true;
  for (const auto& [name, frac] : suite.pass_fraction) {
    os << " " << name << "=" << frac;
    all_pass &= frac >= 0.8;
  }
  os << ", calibration reject rate " << reject_rate;
  return {all_pass && calibrated, os.str()};
}

// -------------------------------------------------------------- criterion 10

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome criterion_determinism(const std::string& cli) {
  if (cli.empty()) return {false, "CLI binary path not provided"};
  const fs::path base = fs::temp_directory_path() / "trevor_acceptance_cli";
  std::error_code ec;
  fs::remove_all(base, ec);

  struct Case {
    std::string name;
    std::string args;
    std::vector<std::string> csvs;
  };
  const std::vector<Case> cases = {
      {"pair", "pair --seed 5 --shift 10", {}},
      {"shift-sweep",
       "shift-sweep --seed 5 --shift-max 100 --shift-step 50 --trials 2",
       {"shift_sweep.csv"}},
      {"attack", "attack --seed 5 --training-rounds 8 --trials 4",
       {"ber_cdf.csv"}},
      {"replay", "replay --seed 5 --trials 5", {"replay.csv"}},
      {"randomness", "randomness --seed 5 --trials 10", {"randomness.csv"}},
      {"cosine", "cosine --seed 5 --shift-max 20 --shift-step 10",
       {"cosine.csv"}},
  };

  for (const auto& c : cases) {
    std::string artifacts[2];
    for (int run = 0; run < 2; ++run) {
      const fs::path out = base / ("run" + std::to_string(run)) / c.name;
      fs::create_directories(out);
      const std::string cmd = cli + " " + c.args + " --out " + out.string() +
                              " > " + (out / "stdout.txt").string() +
                              " 2> /dev/null";
      std::system(cmd.c_str());
      std::string blob;
      for (const auto& csv : c.csvs) blob += slurp(out / csv) + "\n--\n";
      if (c.csvs.empty()) blob = slurp(out / "stdout.txt");
      artifacts[run] = blob;
    }
    if (artifacts[0].empty() || artifacts[0] != artifacts[1])
      return {false, c.name + " output not byte-identical across reruns"};
  }
  fs::remove_all(base, ec);
  return {true, "6 subcommands byte-identical across reruns"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  struct Criterion {
    const char* label;
    double budget_s;
    Outcome (*fn)();
  };

  int failures = 0;
  auto report = [&](int idx, const char* label, double budget_s,
                    const Outcome& outcome, double elapsed) {
    const bool in_budget = elapsed < budget_s;
    const bool ok = outcome.pass && in_budget;
    failures += ok ? 0 : 1;
    std::printf("criterion %2d %-18s %s  (%s; %.1f s%s)\n", idx, label,
                ok ? "PASS" : "FAIL", outcome.detail.c_str(), elapsed,
                in_budget ? "" : ", over budget");
    std::fflush(stdout);
  };
  auto run = [&](int idx, const char* label, double budget_s, auto&& fn) {
    const auto start = Clock::now();
    Outcome outcome;
    try {
      outcome = fn();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    report(idx, label, budget_s, outcome, seconds_since(start));
  };

  run(1, "fft oracle", 1.0, criterion_fft_oracle);
  run(2, "eigen oracle", 10.0, criterion_eigen_oracle);
  run(3, "rs boundary", 60.0, criterion_rs_boundary);
  run(4, "shift tolerance", 300.0, criterion_shift_tolerance);
  run(5, "pairing success", 300.0, criterion_pairing_success);
  run(6, "replay", 120.0, criterion_replay);
  run(7, "syncbleed", 600.0, criterion_syncbleed);
  run(8, "zero leak", 60.0, criterion_zero_leak);
  run(9, "randomness", 120.0, criterion_randomness);
  run(10, "cli determinism", 600.0, [&] { return criterion_determinism(cli); });

  return failures == 0 ? 0 : 1;
}
