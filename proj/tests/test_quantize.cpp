#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "trevor/environment.hpp"
#include "trevor/quantize.hpp"

using namespace trevor;

namespace {

EigenBasis basis_from(std::vector<std::vector<double>> vectors) {
  EigenBasis basis;
  double value = static_cast<double>(vectors.size());
  for (auto& v : vectors) {
    basis.pairs.push_back(EigenPair{value, std::move(v), true});
    value -= 1.0;
  }
  return basis;
}

}  // namespace

TEST_CASE("trevor bins are equal-width and right-open with max in the top bin") {
  const auto sym = trevor_quantize(basis_from({{0.0, 1.0, 0.25, 0.75}}));
  CHECK(sym.symbols == std::vector<std::uint8_t>{0, 3, 1, 3});
}

TEST_CASE("trevor quantization concatenates vectors in dominance order") {
  const auto sym = trevor_quantize(basis_from({{0.0, 0.3}, {0.6, 1.0}}));
  CHECK(sym.symbols == std::vector<std::uint8_t>{0, 1, 2, 3});
}

TEST_CASE("bin edges sit at quarters of the value range") {
  // range [-1, 1]: edges at -0.5, 0, 0.5
  const auto sym = trevor_quantize(
      basis_from({{-1.0, -0.51, -0.5, -0.01, 0.0, 0.49, 0.5, 1.0}}));
  CHECK(sym.symbols ==
        std::vector<std::uint8_t>{0, 0, 1, 1, 2, 2, 3, 3});
}

TEST_CASE("constant eigenbasis is degenerate") {
  CHECK_THROWS_AS(trevor_quantize(basis_from({{0.5, 0.5, 0.5}})),
                  DegenerateInputError);
}

TEST_CASE("empty eigenbasis is rejected") {
  CHECK_THROWS_AS(trevor_quantize(EigenBasis{}), EmptyInputError);
}

TEST_CASE("means quantizer thresholds block means at their median") {
  SampleBuffer buf;
  buf.sample_rate_hz = 100;
  // block means: 1, 3, 2, 0 with block=2; median 1.5
  buf.samples = {1, 1, 3, 3, 2, 2, 0, 0};
  const auto sym = means_quantize(buf, 2);
  CHECK(sym.symbols == std::vector<std::uint8_t>{0, 1, 1, 0});
}

TEST_CASE("means quantizer uses a strict comparison") {
  SampleBuffer buf;
  buf.sample_rate_hz = 100;
  // means 1, 1, 2: median is 1, so equal-to-median blocks give 0
  buf.samples = {1, 1, 1, 1, 2, 2};
  const auto sym = means_quantize(buf, 2);
  CHECK(sym.symbols == std::vector<std::uint8_t>{0, 0, 1});
}

TEST_CASE("means quantizer needs at least two blocks") {
  SampleBuffer buf;
  buf.sample_rate_hz = 100;
  buf.samples = {1, 2, 3};
  CHECK_THROWS_AS(means_quantize(buf, 2), InsufficientDataError);
}

TEST_CASE("schurmann-sigg double delta follows the stated formula") {
  ObservationMatrix X;
  X.rows = {{1, 2, 4}, {1, 5, 4}};
  // j=1: (5-1)-(2-1)=3>0 -> 1 ; j=2: (4-5)-(4-2)=-3 -> 0
  const auto sym = schurmann_sigg_quantize(X);
  CHECK(sym.symbols == std::vector<std::uint8_t>{1, 0});
}

TEST_CASE("schurmann-sigg output size is (rows-1)*(bins-1)") {
  ObservationMatrix X;
  X.rows.assign(5, std::vector<double>(4, 0.0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (auto& row : X.rows)
    for (double& v : row) v = dist(rng);
  CHECK(schurmann_sigg_quantize(X).symbols.size() == 4 * 3);
}

TEST_CASE("schurmann-sigg rejects a single row") {
  ObservationMatrix X;
  X.rows = {{1, 2, 3}};
  CHECK_THROWS_AS(schurmann_sigg_quantize(X), InsufficientDataError);
}

TEST_CASE("trevor symbols pack to two bits MSB first") {
  SymbolSequence sym;
  sym.origin = QuantizerKind::trevor;
  sym.symbols = {0, 1, 2, 3};  // 00 01 10 11 -> 0x1B
  const auto bits = to_bits(sym);
  CHECK(bits.bit_len == 8);
  REQUIRE(bits.bytes.size() == 1);
  CHECK(bits.bytes[0] == 0x1B);
}

TEST_CASE("baseline symbols pack to one bit each") {
  SymbolSequence sym;
  sym.origin = QuantizerKind::means;
  sym.symbols = {1, 0, 1, 1};  // 1011 -> 0xB0 with trailing zero padding
  const auto bits = to_bits(sym);
  CHECK(bits.bit_len == 4);
  REQUIRE(bits.bytes.size() == 1);
  CHECK(bits.bytes[0] == 0xB0);
}

TEST_CASE("bit_error_rate counts mismatched positions") {
  SymbolSequence a, b;
  a.origin = b.origin = QuantizerKind::means;
  a.symbols = {1, 1, 0, 0};
  b.symbols = {1, 0, 0, 1};
  CHECK(bit_error_rate(to_bits(a), to_bits(b)) == 0.5);
  CHECK(bit_error_rate(to_bits(a), to_bits(a)) == 0.0);
}

TEST_CASE("bit_error_rate rejects length mismatch") {
  BitSequence a, b;
  a.push_bit(1);
  b.push_bit(1);
  b.push_bit(0);
  CHECK_THROWS_AS(bit_error_rate(a, b), DimensionError);
}

TEST_CASE("BitSequence round-trips bits through packed bytes") {
  std::mt19937_64 rng(77);
  std::bernoulli_distribution coin(0.5);
  std::vector<bool> ref;
  BitSequence seq;
  for (int i = 0; i < 131; ++i) {
    const bool b = coin(rng);
    ref.push_back(b);
    seq.push_bit(b);
  }
  REQUIRE(seq.bit_len == 131);
  for (std::size_t i = 0; i < ref.size(); ++i) CHECK(seq.bit(i) == ref[i]);
}

namespace {

SampleBuffer quantize_buffer(std::uint64_t seed, std::size_t n) {
  EnvironmentSpec spec;
  spec.source_kind = SourceKind::harmonic_mixture;
  spec.sample_rate_hz = 8000;
  spec.duration_s = static_cast<double>(n) / 8000.0 + 0.5;
  spec.seed = seed;
  spec.devices = {{"a", {}}, {"b", {}}};
  auto env = synthesize_environment(spec);
  env[0].second.samples.resize(n);
  return env[0].second;
}

}  // namespace

TEST_CASE("trevor representation drifts least under time shifts") {
  // Production geometry: the eigenvector stability that drives the ordering
  // needs the full 2048-point blocks and 64-row windows.
  const std::size_t d = 2048, n_bins = 32, rows = 64, shift = 4800;
  EnvironmentSpec spec;
  spec.source_kind = SourceKind::harmonic_mixture;
  spec.sample_rate_hz = 48000;
  spec.duration_s = static_cast<double>(d * rows + shift) / 48000.0 + 0.01;
  spec.seed = 11;
  spec.devices = {{"a", {}}, {"b", {}}};
  auto env = synthesize_environment(spec);
  env[0].second.samples.resize(d * rows + shift);
  const auto& buf = env[0].second;

  const double pc = mean_cosine_distance(buf, buf, Representation::trevor_pc,
                                         shift, 1200, d, n_bins);
  const double fft = mean_cosine_distance(buf, buf, Representation::fft,
                                          shift, 1200, d, n_bins);
  const double time = mean_cosine_distance(buf, buf, Representation::time,
                                           shift, 1200, d, n_bins);
  CHECK(pc < fft);
  CHECK(fft < time);
  CHECK(pc >= 0.0);
}

TEST_CASE("mean cosine distance of identical unshifted buffers is zero") {
  const auto buf = quantize_buffer(6, 4096);
  CHECK(mean_cosine_distance(buf, buf, Representation::time, 0, 1, 256, 16) ==
        Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("mean cosine distance requires long-enough buffers") {
  const auto buf = quantize_buffer(8, 100);
  CHECK_THROWS_AS(
      mean_cosine_distance(buf, buf, Representation::time, 100, 10, 256, 16),
      InsufficientDataError);
}
