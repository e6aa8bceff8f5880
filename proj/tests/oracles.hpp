#pragma once

// Test-only reference computations. Nothing here calls into the code paths
// it is used to check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "thermoscale/linalg.hpp"

namespace thermoscale::oracle {

// Kronecker product entry by explicit index arithmetic.
inline complex kron_entry(const ComplexMatrix& a, const ComplexMatrix& b, std::size_t i,
                          std::size_t j) {
  return a(i / b.rows(), j / b.cols()) * b(i % b.rows(), j % b.cols());
}

// Two-sided Kolmogorov-Smirnov p-value for the one-sample statistic d on n
// samples (asymptotic series with the Stephens correction).
inline double ks_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

// KS statistic of samples against Uniform(0, 1).
inline double ks_uniform_statistic(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    d = std::max(d, std::max(static_cast<double>(i + 1) / n - u[i], u[i] - static_cast<double>(i) / n));
  }
  return d;
}

// Eigenvalues of a general 2x2 complex matrix (quadratic formula).
inline std::pair<complex, complex> eig2(const ComplexMatrix& m) {
  const complex tr = m(0, 0) + m(1, 1);
  const complex det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const complex disc = std::sqrt(tr * tr - 4.0 * det);
  return {(tr + disc) / 2.0, (tr - disc) / 2.0};
}

// Fidelity between two diagonal states: (sum_k sqrt(p_k q_k))^2.
inline double diagonal_fidelity(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += std::sqrt(p[k] * q[k]);
  return s * s;
}

// Naive triple-loop product, independent of the library's matmul.
inline ComplexMatrix naive_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      complex s{};
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

}  // namespace thermoscale::oracle
