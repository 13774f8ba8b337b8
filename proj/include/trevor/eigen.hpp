#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "trevor/errors.hpp"
#include "trevor/spectral.hpp"

namespace trevor {

// Dense symmetric matrix, row-major.
struct CovarianceMatrix {
  std::vector<double> entries;
  std::size_t m = 0;

  double& at(std::size_t i, std::size_t j) { return entries[i * m + j]; }
  double at(std::size_t i, std::size_t j) const { return entries[i * m + j]; }

  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < m; ++i) t += at(i, i);
    return t;
  }
};

struct EigenPair {
  double value = 0.0;
  std::vector<double> vector;
  bool converged = true;
};

// Ordered dominant eigenpairs of C after sign correction.
struct EigenBasis {
  std::vector<EigenPair> pairs;
  std::size_t k() const { return pairs.size(); }
};

// Raw Gram form C = X^T X, no mean-centering.
inline CovarianceMatrix covariance(const ObservationMatrix& X) {
  if (X.rows.empty()) throw EmptyInputError("observation matrix has no rows");
  const std::size_t m = X.dim();
  CovarianceMatrix C;
  C.m = m;
  C.entries.assign(m * m, 0.0);
  for (const auto& row : X.rows)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i; j < m; ++j) C.at(i, j) += row[i] * row[j];
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < i; ++j) C.at(i, j) = C.at(j, i);
  return C;
}

namespace detail {

inline double norm2(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

inline std::vector<double> matvec(const CovarianceMatrix& C,
                                  const std::vector<double>& v) {
  std::vector<double> out(C.m, 0.0);
  for (std::size_t i = 0; i < C.m; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < C.m; ++j) acc += C.at(i, j) * v[j];
    out[i] = acc;
  }
  return out;
}

}  // namespace detail

// Power iteration from a deterministic all-ones start so both pairing devices
// run identical arithmetic. Eigenvalue is the Rayleigh quotient at the final
// iterate. A non-converged result carries converged=false rather than failing.
inline EigenPair power_method(const CovarianceMatrix& C, double tol = 1e-10,
                              std::size_t max_iter = 1000) {
  const std::size_t m = C.m;
  double frob = 0.0;
  for (double e : C.entries) frob += e * e;
  if (frob == 0.0) throw DegenerateInputError("power method on zero matrix");

  std::vector<double> v(m, 1.0 / std::sqrt(static_cast<double>(m)));
  // Start vector orthogonal to the dominant eigenvector: nudge and renormalize.
  {
    auto cv = detail::matvec(C, v);
    if (detail::norm2(cv) < 1e-14 * std::abs(C.trace())) {
      v[0] += 1e-6;
      const double n = detail::norm2(v);
      for (double& x : v) x /= n;
    }
  }

  bool converged = false;
  for (std::size_t it = 0; it < max_iter; ++it) {
    auto cv = detail::matvec(C, v);
    const double n = detail::norm2(cv);
    if (n == 0.0) break;  // v is in the null space; Rayleigh quotient is 0
    for (double& x : cv) x /= n;
    double change = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double d = cv[i] - v[i];
      change += d * d;
    }
    v = std::move(cv);
    if (std::sqrt(change) < tol) {
      converged = true;
      break;
    }
  }

  const auto cv = detail::matvec(C, v);
  double rayleigh = 0.0;
  for (std::size_t i = 0; i < m; ++i) rayleigh += v[i] * cv[i];
  return EigenPair{rayleigh, std::move(v), converged};
}

// C' = C - lambda v v^T
inline CovarianceMatrix deflate(const CovarianceMatrix& C, double lambda,
                                const std::vector<double>& v) {
  CovarianceMatrix out = C;
  for (std::size_t i = 0; i < C.m; ++i)
    for (std::size_t j = 0; j < C.m; ++j) out.at(i, j) -= lambda * v[i] * v[j];
  return out;
}

// Forces the sign of the largest-magnitude component to be positive. Resolves
// the +-v ambiguity identically on both devices.
inline void sign_correct(std::vector<double>& v) {
  std::size_t imax = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
  if (v[imax] < 0.0)
    for (double& x : v) x = -x;
}

// Top-k eigenpairs by power iteration with deflation, each sign-corrected,
// sorted by eigenvalue descending.
inline EigenBasis extract_basis(const CovarianceMatrix& C, std::size_t k,
                                double tol = 1e-10, std::size_t max_iter = 1000) {
  if (k == 0 || k > C.m)
    throw ConfigError("k must be in [1, " + std::to_string(C.m) + "]");
  EigenBasis basis;
  CovarianceMatrix work = C;
  for (std::size_t i = 0; i < k; ++i) {
    EigenPair pair = power_method(work, tol, max_iter);
    work = deflate(work, pair.value, pair.vector);
    sign_correct(pair.vector);
    basis.pairs.push_back(std::move(pair));
  }
  return basis;
}

}  // namespace trevor
