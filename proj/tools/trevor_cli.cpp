#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "svg_plot.hpp"
#include "trevor/environment.hpp"
#include "trevor/nist.hpp"
#include "trevor/protocol.hpp"
#include "trevor/quantize.hpp"
#include "trevor/signal.hpp"
#include "trevor/syncbleed.hpp"

namespace {

using namespace trevor;

int g_log_level = 1;  // 0 = debug, 1 = info, 2 = warn, 3 = error

void init_log_level() {
  const char* env = std::getenv("TREVOR_LOG");
  if (!env) return;
  const std::string v = env;
  if (v == "debug") g_log_level = 0;
  else if (v == "info") g_log_level = 1;
  else if (v == "warn") g_log_level = 2;
  else if (v == "error") g_log_level = 3;
}

void log_at(int level, const char* tag, const std::string& msg) {
  if (level >= g_log_level) std::cerr << "[" << tag << "] " << msg << "\n";
}

void log_debug(const std::string& msg) { log_at(0, "debug", msg); }
void log_info(const std::string& msg) { log_at(1, "info", msg); }

struct CommonArgs {
  std::string env_path;
  std::uint64_t seed = 1;
  bool seed_given = false;
  std::string out_dir = ".";
  bool debug = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--env", args.env_path, "environment spec JSON file");
  cmd->add_option("--seed", args.seed, "base RNG seed")
      ->each([&](const std::string&) { args.seed_given = true; });
  cmd->add_option("--out", args.out_dir, "output directory for artifacts");
  cmd->add_flag("--debug", args.debug, "print diagnostic details");
}

EnvironmentSpec default_env(bool with_adversary) {
  EnvironmentSpec spec;
  spec.source_kind = SourceKind::harmonic_mixture;
  spec.sample_rate_hz = 48000;
  spec.duration_s = 3.0;
  spec.seed = 1;
  ChannelModel legit;
  legit.snr_db = 20.0;
  spec.devices = {{"alice", legit}, {"bob", legit}};
  if (with_adversary) {
    ChannelModel wall;
    wall.fir_taps = detail::lowpass_taps(2000.0 / spec.sample_rate_hz);
    wall.snr_db = 5.0;
    spec.devices.emplace_back("adversary", wall);
  }
  return spec;
}

EnvironmentSpec load_env(const CommonArgs& args, bool with_adversary = false) {
  EnvironmentSpec spec;
  if (args.env_path.empty()) {
    spec = default_env(with_adversary);
  } else {
    std::ifstream in(args.env_path);
    if (!in) throw ConfigError("cannot open environment spec " + args.env_path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("bad JSON in " + args.env_path + ": " + e.what());
    }
    spec = j.get<EnvironmentSpec>();
  }
  if (args.seed_given || args.env_path.empty()) spec.seed = args.seed;
  return spec;
}

void ensure_duration(EnvironmentSpec& spec, std::size_t needed_samples) {
  const double needed_s =
      static_cast<double>(needed_samples + 1) / spec.sample_rate_hz;
  if (spec.duration_s < needed_s) {
    log_info("extending environment duration to " + std::to_string(needed_s) +
             " s to cover the experiment window");
    spec.duration_s = needed_s;
  }
}

std::size_t ms_to_samples(double ms, std::uint32_t rate) {
  return static_cast<std::size_t>(ms / 1000.0 * rate);
}

BitSequence quantizer_bits(QuantizerKind q, const PairingConfig& cfg,
                           const SampleBuffer& window) {
  switch (q) {
    case QuantizerKind::trevor:
      return detail::trevor_bits(cfg, window);
    case QuantizerKind::schurmann_sigg:
      return detail::baseline_bits(cfg, window);
    case QuantizerKind::means:
      return to_bits(means_quantize(window, cfg.spectral.block_len_d));
  }
  throw ConfigError("bad quantizer");
}

std::string quantizer_name(QuantizerKind q) {
  switch (q) {
    case QuantizerKind::trevor: return "trevor";
    case QuantizerKind::means: return "means";
    case QuantizerKind::schurmann_sigg: return "ss";
  }
  throw ConfigError("bad quantizer");
}

std::vector<QuantizerKind> parse_quantizers(const std::string& s) {
  if (s == "all")
    return {QuantizerKind::trevor, QuantizerKind::means,
            QuantizerKind::schurmann_sigg};
  if (s == "trevor") return {QuantizerKind::trevor};
  if (s == "means") return {QuantizerKind::means};
  if (s == "ss") return {QuantizerKind::schurmann_sigg};
  throw ConfigError("unknown quantizer: " + s + " (use trevor|means|ss|all)");
}

std::filesystem::path out_file(const CommonArgs& args, const std::string& name) {
  std::filesystem::create_directories(args.out_dir);
  return std::filesystem::path(args.out_dir) / name;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  return os.str();
}

// ---------------------------------------------------------------------------

struct PairArgs {
  CommonArgs common;
  std::string transport = "loopback";
  std::string role = "initiator";
  std::string protocol = "trevor";
  double shift_ms = 0.0;
};

ProtocolKind parse_protocol(const std::string& s) {
  if (s == "trevor") return ProtocolKind::trevor;
  if (s == "sync") return ProtocolKind::sync_baseline;
  throw ConfigError("unknown protocol: " + s + " (use trevor|sync)");
}

PairingConfig pairing_config(ProtocolKind kind) {
  PairingConfig cfg;
  cfg.protocol_kind = kind;
  return cfg;  // defaults: d=2048, 32 bins, 64 rows, k=4, rs(32,12)
}

SampleBuffer shifted(const SampleBuffer& buf, std::size_t shift) {
  if (shift == 0) return buf;
  if (buf.size() <= shift)
    throw InsufficientDataError("buffer shorter than requested shift");
  SampleBuffer out = buf;
  out.samples.erase(out.samples.begin(), out.samples.begin() + shift);
  return out;
}

int cmd_pair(const PairArgs& args) {
  const auto kind = parse_protocol(args.protocol);
  auto cfg = pairing_config(kind);
  auto spec = load_env(args.common);
  const std::size_t window = cfg.spectral.block_len_d * cfg.spectral.min_rows;
  const std::size_t shift = ms_to_samples(args.shift_ms, spec.sample_rate_hz);
  ensure_duration(spec, window + shift + spec.sample_rate_hz / 4);

  auto report = [&](const PairingSession& s, const std::string& who) {
    if (s.verified()) {
      std::cout << who << ": verified\n";
    } else {
      std::cout << who << ": rejected";
      if (!s.reject_reason.empty()) std::cout << " (" << s.reject_reason << ")";
      std::cout << "\n";
    }
  };

  if (args.transport == "loopback") {
    const auto env = synthesize_environment(spec);
    const auto& a = env[0].second;
    const auto b = shifted(env[1].second, shift);
    RunOptions opts;
    opts.key_seed = detail::splitmix64(spec.seed ^ 0x6b65ULL);
    const auto [init, resp] = run_loopback(cfg, a, b, opts);
    report(init, env[0].first);
    report(resp, env[1].first);
    if (args.common.debug && init.local_bits.bit_len == resp.local_bits.bit_len)
      std::cout << "ber: " << fmt(bit_error_rate(init.local_bits, resp.local_bits))
                << "\n";
    return (init.verified() && resp.verified()) ? 0 : 1;
  }

  // tcp://host:port
  if (args.transport.rfind("tcp://", 0) != 0)
    throw ConfigError("transport must be loopback or tcp://host:port");
  const std::string hostport = args.transport.substr(6);
  const auto colon = hostport.rfind(':');
  if (colon == std::string::npos)
    throw ConfigError("transport must be tcp://host:port");
  const std::string host = hostport.substr(0, colon);
  const int port = std::stoi(hostport.substr(colon + 1));
  if (port < 1 || port > 65535) throw ConfigError("bad port");

  const auto env = synthesize_environment(spec);
  std::unique_ptr<TcpTransport> transport;
  SampleBuffer signal;
  if (args.role == "initiator") {
    cfg.role = Role::initiator;
    signal = env[0].second;
    transport = TcpTransport::connect(host, static_cast<std::uint16_t>(port));
  } else if (args.role == "responder") {
    cfg.role = Role::responder;
    signal = shifted(env[1].second, shift);
    transport = TcpTransport::accept_one(static_cast<std::uint16_t>(port));
  } else {
    throw ConfigError("role must be initiator or responder");
  }
  const auto session = (kind == ProtocolKind::trevor)
                           ? run_pairing(cfg, signal, *transport)
                           : run_sync_baseline(cfg, signal, *transport);
  report(session, args.role);
  return session.verified() ? 0 : 1;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  CommonArgs common;
  double shift_max_ms = 2000.0;
  double shift_step_ms = 50.0;
  std::size_t trials = 20;
  std::string quantizer = "all";
};

int cmd_shift_sweep(const SweepArgs& args) {
  const auto quantizers = parse_quantizers(args.quantizer);
  auto cfg = pairing_config(ProtocolKind::trevor);
  auto base = load_env(args.common);
  const std::size_t window = cfg.spectral.block_len_d * cfg.spectral.min_rows;
  const std::size_t max_shift = ms_to_samples(args.shift_max_ms, base.sample_rate_hz);
  const std::size_t step =
      std::max<std::size_t>(1, ms_to_samples(args.shift_step_ms, base.sample_rate_hz));
  ensure_duration(base, window + max_shift);

  std::vector<std::size_t> shifts;
  for (std::size_t s = 0; s <= max_shift; s += step) shifts.push_back(s);

  // mean_ber[quantizer][shift point]
  std::vector<std::vector<double>> mean_ber(quantizers.size(),
                                            std::vector<double>(shifts.size(), 0.0));
  for (std::size_t t = 0; t < args.trials; ++t) {
    EnvironmentSpec spec = base;
    spec.seed = base.seed ^ t;
    const auto env = synthesize_environment(spec);
    const auto& a = env[0].second;
    const auto& b = env[1].second;
    const auto win_a = detail::window_from(a, 0, window);
    std::vector<BitSequence> ref;
    for (auto q : quantizers) ref.push_back(quantizer_bits(q, cfg, win_a));
    for (std::size_t si = 0; si < shifts.size(); ++si) {
      const auto win_b = detail::window_from(b, shifts[si], window);
      for (std::size_t qi = 0; qi < quantizers.size(); ++qi) {
        const auto bits_b = quantizer_bits(quantizers[qi], cfg, win_b);
        mean_ber[qi][si] += bit_error_rate(ref[qi], bits_b);
      }
    }
    log_debug("sweep trial " + std::to_string(t) + " done");
  }

  std::ostringstream csv;
  csv << "shift_samples,quantizer,role_pair,ber\n";
  std::vector<svgplot::Series> series;
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c"};
  for (std::size_t qi = 0; qi < quantizers.size(); ++qi) {
    svgplot::Series s;
    s.label = quantizer_name(quantizers[qi]);
    s.color = colors[qi % 3];
    for (std::size_t si = 0; si < shifts.size(); ++si) {
      const double ber = mean_ber[qi][si] / static_cast<double>(args.trials);
      csv << shifts[si] << "," << quantizer_name(quantizers[qi]) << ","
          << "a-b," << fmt(ber) << "\n";
      s.x.push_back(static_cast<double>(shifts[si]) / base.sample_rate_hz * 1000.0);
      s.y.push_back(ber);
    }
    series.push_back(std::move(s));
  }
  const auto csv_path = out_file(args.common, "shift_sweep.csv");
  std::ofstream(csv_path) << csv.str();
  svgplot::write_line_plot(out_file(args.common, "shift_sweep.svg").string(),
                           "bit error rate vs shift", "shift (ms)", "BER", series);
  std::cout << "wrote " << csv_path.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct AttackArgs {
  CommonArgs common;
  std::size_t training_rounds = 256;
  std::size_t trials = 100;
  std::size_t radius = 0;
  std::string protocol = "sync";
};

int cmd_attack(const AttackArgs& args) {
  AttackConfig cfg;
  cfg.pairing.protocol_kind = parse_protocol(args.protocol);
  cfg.search_radius = args.radius;
  auto spec = load_env(args.common, /*with_adversary=*/true);
  const std::size_t window =
      cfg.pairing.spectral.block_len_d * cfg.pairing.spectral.min_rows;
  ensure_duration(spec, window + spec.sample_rate_hz / 4);

  AttackReport report;
  try {
    report = run_attack(spec, args.training_rounds, args.trials, cfg);
  } catch (const InsufficientDataError& e) {
    std::cout << "attack infeasible: " << e.what()
              << " (no sync snippets to train on)\n";
    return 1;
  }

  nlohmann::json j{{"ber_without_attack", report.ber_without_attack},
                   {"ber_with_attack", report.ber_with_attack},
                   {"trials", report.trials},
                   {"reconciliation_successes", report.reconciliation_successes}};
  std::ofstream(out_file(args.common, "attack_report.json")) << j.dump(2) << "\n";

  std::ostringstream csv;
  csv << "trial,ber_without,ber_with\n";
  for (std::size_t i = 0; i < report.per_trial_with.size(); ++i)
    csv << i << "," << fmt(report.per_trial_without[i]) << ","
        << fmt(report.per_trial_with[i]) << "\n";
  std::ofstream(out_file(args.common, "ber_cdf.csv")) << csv.str();

  svgplot::write_cdf_plot(
      out_file(args.common, "ber_cdf.svg").string(), "adversary BER CDF", "BER",
      {{"without attack", "#1f77b4", report.per_trial_without, {}},
       {"with attack", "#d62728", report.per_trial_with, {}}});

  std::cout << "ber without attack: " << fmt(report.ber_without_attack) << "\n"
            << "ber with attack:    " << fmt(report.ber_with_attack) << "\n"
            << "reconciliation successes: " << report.reconciliation_successes
            << "/" << report.trials << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct ReplayArgs {
  CommonArgs common;
  std::size_t trials = 100;
};

int cmd_replay(const ReplayArgs& args) {
  auto cfg = pairing_config(ProtocolKind::trevor);
  auto base = load_env(args.common);
  const std::size_t window = cfg.spectral.block_len_d * cfg.spectral.min_rows;
  ensure_duration(base, window);

  std::size_t legit_ok = 0, replay_ok = 0;
  double ber_sum = 0.0;
  std::ostringstream csv;
  csv << "trial,ber,success\n";
  for (std::size_t t = 0; t < args.trials; ++t) {
    EnvironmentSpec live = base;
    live.seed = detail::splitmix64((base.seed ^ t) * 2 + 1);
    EnvironmentSpec recorded = base;
    recorded.seed = detail::splitmix64((base.seed ^ t) * 2 + 2);

    const auto live_env = synthesize_environment(live);
    RunOptions opts;
    opts.key_seed = detail::splitmix64(live.seed ^ 0x6b65ULL);
    const auto [init, resp] =
        run_loopback(cfg, live_env[0].second, live_env[1].second, opts);
    legit_ok += (init.verified() && resp.verified()) ? 1 : 0;

    // the adversary replays audio recorded in an earlier epoch
    const auto old_env = synthesize_environment(recorded);
    const auto adv_bits =
        detail::trevor_bits(cfg, detail::window_from(old_env[0].second, 0, window));
    const double ber = bit_error_rate(init.local_bits, adv_bits);
    ber_sum += ber;

    bool success = false;
    for (const auto& entry : init.transcript)
      if (entry.type == MsgType::COMMIT) {
        const auto commitment =
            FuzzyCommitment::deserialize(deserialize(entry.frame).body);
        success = decommit(commitment, adv_bits).has_value();
      }
    replay_ok += success ? 1 : 0;
    csv << t << "," << fmt(ber) << "," << (success ? 1 : 0) << "\n";
  }

  const auto csv_path = out_file(args.common, "replay.csv");
  std::ofstream(csv_path) << csv.str();
  const double mean_ber = ber_sum / static_cast<double>(args.trials);
  std::cout << "legitimate pairings verified: " << legit_ok << "/" << args.trials
            << "\n"
            << "replay mean ber: " << fmt(mean_ber) << "\n"
            << "replay successes: " << replay_ok << "/" << args.trials << "\n";
  return (replay_ok == 0 && 2 * legit_ok >= args.trials) ? 0 : 1;
}

// ---------------------------------------------------------------------------

struct RandomnessArgs {
  CommonArgs common;
  std::size_t trials = 100;
};

int cmd_randomness(const RandomnessArgs& args) {
  auto cfg = pairing_config(ProtocolKind::trevor);
  auto base = load_env(args.common);
  const std::size_t window = cfg.spectral.block_len_d * cfg.spectral.min_rows;
  ensure_duration(base, window);

  std::vector<BitSequence> keys;
  for (std::size_t t = 0; t < args.trials; ++t) {
    EnvironmentSpec spec = base;
    spec.seed = base.seed ^ t;
    const auto env = synthesize_environment(spec);
    keys.push_back(
        detail::trevor_bits(cfg, detail::window_from(env[0].second, 0, window)));
  }
  const auto suite = run_suite(keys);

  std::cout << "randomness suite: " << suite.key_count << " keys x "
            << suite.bit_len << " bits, alpha 0.01\n";
  std::ostringstream csv;
  csv << "test,pass_fraction\n";
  nlohmann::json jt;
  for (const auto& [name, frac] : suite.pass_fraction) {
    std::cout << "  " << std::left << std::setw(22) << name << fmt(frac) << "  "
              << (frac >= 0.8 ? "pass" : "FAIL") << "\n";
    csv << name << "," << fmt(frac) << "\n";
    jt[name] = frac;
  }
  std::cout << (suite.suite_pass ? "suite: pass\n" : "suite: FAIL\n");

  std::ofstream(out_file(args.common, "randomness.csv")) << csv.str();
  nlohmann::json j{{"key_count", suite.key_count},
                   {"bit_len", suite.bit_len},
                   {"alpha", 0.01},
                   {"pass_fraction", jt},
                   {"suite_pass", suite.suite_pass}};
  std::ofstream(out_file(args.common, "randomness.json")) << j.dump(2) << "\n";
  return suite.suite_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------

struct CosineArgs {
  CommonArgs common;
  double shift_max_ms = 100.0;
  double shift_step_ms = 10.0;
};

int cmd_cosine(const CosineArgs& args) {
  auto cfg = pairing_config(ProtocolKind::trevor);
  auto spec = load_env(args.common);
  const std::size_t window = cfg.spectral.block_len_d * cfg.spectral.min_rows;
  const std::size_t max_shift = ms_to_samples(args.shift_max_ms, spec.sample_rate_hz);
  const std::size_t step =
      std::max<std::size_t>(1, ms_to_samples(args.shift_step_ms, spec.sample_rate_hz));
  ensure_duration(spec, window + max_shift);

  const auto env = synthesize_environment(spec);
  std::ostringstream csv;
  csv << "device,representation,mean_cosine_distance\n";
  const std::pair<Representation, const char*> reprs[] = {
      {Representation::time, "time"},
      {Representation::fft, "fft"},
      {Representation::trevor_pc, "trevor_pc"}};
  for (const auto& [id, buf] : env) {
    for (const auto& [repr, name] : reprs) {
      const double dist = mean_cosine_distance(
          buf, buf, repr, max_shift, step, cfg.spectral.block_len_d,
          cfg.spectral.n_bins);
      csv << id << "," << name << "," << fmt(dist) << "\n";
      std::cout << id << " " << name << " " << fmt(dist) << "\n";
    }
  }
  std::ofstream(out_file(args.common, "cosine.csv")) << csv.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  init_log_level();
  CLI::App app{"zero-involvement pairing toolkit"};
  app.require_subcommand(1);

  PairArgs pair_args;
  auto* pair = app.add_subcommand("pair", "run one pairing session");
  add_common(pair, pair_args.common);
  pair->add_option("--transport", pair_args.transport,
                   "loopback or tcp://host:port");
  pair->add_option("--role", pair_args.role, "initiator|responder (tcp only)");
  pair->add_option("--protocol", pair_args.protocol, "trevor|sync");
  pair->add_option("--shift", pair_args.shift_ms, "responder shift in ms");

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("shift-sweep", "BER vs relative shift sweep");
  add_common(sweep, sweep_args.common);
  sweep->add_option("--shift-max", sweep_args.shift_max_ms, "max shift in ms");
  sweep->add_option("--shift-step", sweep_args.shift_step_ms, "shift step in ms");
  sweep->add_option("--trials", sweep_args.trials, "trials per shift point");
  sweep->add_option("--quantizer", sweep_args.quantizer, "trevor|means|ss|all");

  AttackArgs attack_args;
  auto* attack = app.add_subcommand("attack", "run the snippet-inversion attack");
  add_common(attack, attack_args.common);
  attack->add_option("--training-rounds", attack_args.training_rounds,
                     "snooped training rounds");
  attack->add_option("--trials", attack_args.trials, "attacked sessions");
  attack->add_option("--radius", attack_args.radius, "reconciliation search radius");
  attack->add_option("--protocol", attack_args.protocol, "sync|trevor");

  ReplayArgs replay_args;
  auto* replay = app.add_subcommand("replay", "replay earlier recordings");
  add_common(replay, replay_args.common);
  replay->add_option("--trials", replay_args.trials, "replay trials");

  RandomnessArgs rand_args;
  auto* rand_cmd = app.add_subcommand("randomness", "statistical tests on keys");
  add_common(rand_cmd, rand_args.common);
  rand_cmd->add_option("--trials", rand_args.trials, "number of keys");

  CosineArgs cosine_args;
  auto* cosine = app.add_subcommand("cosine", "representation drift diagnostic");
  add_common(cosine, cosine_args.common);
  cosine->add_option("--shift-max", cosine_args.shift_max_ms, "max shift in ms");
  cosine->add_option("--shift-step", cosine_args.shift_step_ms, "shift step in ms");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // usage errors exit 2
  }

  try {
    if (pair_args.common.debug || sweep_args.common.debug ||
        attack_args.common.debug || replay_args.common.debug ||
        rand_args.common.debug || cosine_args.common.debug)
      g_log_level = std::min(g_log_level, 0);
    if (app.got_subcommand(pair)) return cmd_pair(pair_args);
    if (app.got_subcommand(sweep)) return cmd_shift_sweep(sweep_args);
    if (app.got_subcommand(attack)) return cmd_attack(attack_args);
    if (app.got_subcommand(replay)) return cmd_replay(replay_args);
    if (app.got_subcommand(rand_cmd)) return cmd_randomness(rand_args);
    if (app.got_subcommand(cosine)) return cmd_cosine(cosine_args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
