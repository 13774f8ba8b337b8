#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "trevor/errors.hpp"
#include "trevor/quantize.hpp"

namespace trevor {

// SP 800-22 style test statistics; pass at significance alpha = 0.01.
struct RandTestResult {
  double statistic = 0.0;
  double p_value = 0.0;
  bool pass = false;
};

struct RandTestReport {
  std::map<std::string, RandTestResult> per_test;
  std::size_t bit_len = 0;
};

constexpr double kRandAlpha = 0.01;

namespace detail {

inline RandTestResult make_result(double stat, double p) {
  return {stat, p, p >= kRandAlpha};
}

inline void require_bits(const BitSequence& bits, std::size_t min_len,
                         const char* test) {
  if (bits.bit_len < min_len)
    throw InsufficientDataError(std::string(test) + " needs at least " +
                                std::to_string(min_len) + " bits");
}

inline double std_normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

}  // namespace detail

// Monobit frequency test.
inline RandTestResult test_frequency(const BitSequence& bits) {
  detail::require_bits(bits, 100, "frequency test");
  const double n = static_cast<double>(bits.bit_len);
  double s = 0.0;
  for (std::size_t i = 0; i < bits.bit_len; ++i) s += bits.bit(i) ? 1.0 : -1.0;
  const double s_obs = std::abs(s) / std::sqrt(n);
  return detail::make_result(s_obs, std::erfc(s_obs / std::sqrt(2.0)));
}

// Frequency within non-overlapping blocks of `block` bits.
inline RandTestResult test_block_frequency(const BitSequence& bits,
                                           std::size_t block = 128) {
  detail::require_bits(bits, block * 20, "block frequency test");
  const std::size_t n_blocks = bits.bit_len / block;
  double chi2 = 0.0;
  for (std::size_t b = 0; b < n_blocks; ++b) {
    std::size_t ones = 0;
    for (std::size_t i = 0; i < block; ++i) ones += bits.bit(b * block + i);
    const double pi = static_cast<double>(ones) / static_cast<double>(block);
    chi2 += (pi - 0.5) * (pi - 0.5);
  }
  chi2 *= 4.0 * static_cast<double>(block);
  const double p =
      boost::math::gamma_q(static_cast<double>(n_blocks) / 2.0, chi2 / 2.0);
  return detail::make_result(chi2, p);
}

// Total number of runs of identical bits.
inline RandTestResult test_runs(const BitSequence& bits) {
  detail::require_bits(bits, 100, "runs test");
  const double n = static_cast<double>(bits.bit_len);
  std::size_t ones = 0;
  for (std::size_t i = 0; i < bits.bit_len; ++i) ones += bits.bit(i);
  const double pi = static_cast<double>(ones) / n;
  if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(n))
    return detail::make_result(0.0, 0.0);  // frequency prerequisite failed
  double v = 1.0;
  for (std::size_t i = 0; i + 1 < bits.bit_len; ++i)
    v += bits.bit(i) != bits.bit(i + 1);
  const double num = std::abs(v - 2.0 * n * pi * (1.0 - pi));
  const double den = 2.0 * std::sqrt(2.0 * n) * pi * (1.0 - pi);
  return detail::make_result(v, std::erfc(num / den));
}

// Maximum cumulative-sum excursion (forward mode).
inline RandTestResult test_cumulative_sums(const BitSequence& bits) {
  detail::require_bits(bits, 100, "cumulative sums test");
  const double n = static_cast<double>(bits.bit_len);
  double s = 0.0, z = 0.0;
  for (std::size_t i = 0; i < bits.bit_len; ++i) {
    s += bits.bit(i) ? 1.0 : -1.0;
    z = std::max(z, std::abs(s));
  }
  if (z == 0.0) return detail::make_result(0.0, 0.0);
  const double sqrt_n = std::sqrt(n);
  double p = 1.0;
  {
    const long j_lo = static_cast<long>(std::floor((-n / z + 1.0) / 4.0));
    const long j_hi = static_cast<long>(std::floor((n / z - 1.0) / 4.0));
    for (long j = j_lo; j <= j_hi; ++j) {
      p -= detail::std_normal_cdf((4.0 * j + 1.0) * z / sqrt_n) -
           detail::std_normal_cdf((4.0 * j - 1.0) * z / sqrt_n);
    }
  }
  {
    const long j_lo = static_cast<long>(std::floor((-n / z - 3.0) / 4.0));
    const long j_hi = static_cast<long>(std::floor((n / z - 1.0) / 4.0));
    for (long j = j_lo; j <= j_hi; ++j) {
      p += detail::std_normal_cdf((4.0 * j + 3.0) * z / sqrt_n) -
           detail::std_normal_cdf((4.0 * j + 1.0) * z / sqrt_n);
    }
  }
  p = std::min(std::max(p, 0.0), 1.0);
  return detail::make_result(z, p);
}

// Approximate entropy over overlapping m-bit patterns (with wraparound).
inline RandTestResult test_approximate_entropy(const BitSequence& bits,
                                               std::size_t m = 2) {
  detail::require_bits(bits, 100, "approximate entropy test");
  const double n = static_cast<double>(bits.bit_len);

  auto phi = [&](std::size_t mm) {
    std::vector<std::size_t> counts(1u << mm, 0);
    for (std::size_t i = 0; i < bits.bit_len; ++i) {
      std::size_t pattern = 0;
      for (std::size_t j = 0; j < mm; ++j)
        pattern = (pattern << 1) | bits.bit((i + j) % bits.bit_len);
      ++counts[pattern];
    }
    double acc = 0.0;
    for (std::size_t c : counts)
      if (c > 0) {
        const double f = static_cast<double>(c) / n;
        acc += f * std::log(f);
      }
    return acc;
  };

  const double ap_en = phi(m) - phi(m + 1);
  const double chi2 = 2.0 * n * (std::log(2.0) - ap_en);
  const double p =
      boost::math::gamma_q(std::pow(2.0, static_cast<double>(m) - 1.0), chi2 / 2.0);
  return detail::make_result(chi2, p);
}

inline RandTestReport run_tests(const BitSequence& bits) {
  RandTestReport report;
  report.bit_len = bits.bit_len;
  // Block size scaled down for short keys so the block count stays >= 20.
  const std::size_t block = std::min<std::size_t>(128, std::max<std::size_t>(8, bits.bit_len / 20));
  report.per_test["frequency"] = test_frequency(bits);
  report.per_test["block_frequency"] = test_block_frequency(bits, block);
  report.per_test["runs"] = test_runs(bits);
  report.per_test["cumulative_sums"] = test_cumulative_sums(bits);
  report.per_test["approximate_entropy"] = test_approximate_entropy(bits);
  return report;
}

struct SuiteReport {
  std::map<std::string, double> pass_fraction;
  std::size_t key_count = 0;
  std::size_t bit_len = 0;
  bool suite_pass = false;  // every test's pass fraction >= 0.8
};

inline SuiteReport run_suite(const std::vector<BitSequence>& keys) {
  if (keys.empty()) throw EmptyInputError("run_suite needs at least one key");
  SuiteReport suite;
  suite.key_count = keys.size();
  suite.bit_len = keys.front().bit_len;
  std::map<std::string, std::size_t> passes;
  for (const auto& key : keys) {
    const auto report = run_tests(key);
    for (const auto& [name, result] : report.per_test)
      passes[name] += result.pass ? 1 : 0;
  }
  suite.suite_pass = true;
  for (const auto& [name, count] : passes) {
    const double frac =
        static_cast<double>(count) / static_cast<double>(keys.size());
    suite.pass_fraction[name] = frac;
    suite.suite_pass &= frac >= 0.8;
  }
  return suite;
}

}  // namespace trevor
