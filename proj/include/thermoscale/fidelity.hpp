#pragma once

// Fidelity functionals and the closed-form results of the thermal
// initialization model:
//
//   F_I(x, N) = (1 + e^{-x})^{-N},      x = beta * dE
//
// together with the preparation fidelity F_P of a noisy circuit, the
// fidelity of the composite "initialization + preparation" process and the
// bounds F_P F_I <= F <= min(F_P, F_I).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "thermoscale/channels.hpp"
#include "thermoscale/error.hpp"
#include "thermoscale/linalg.hpp"
#include "thermoscale/states.hpp"

namespace thermoscale {

// Eigenvalues at or below this are outside a state's numerical support.
inline constexpr double kSupportTolerance = 1e-12;

// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
//
// Evaluated on the support of whichever state has the smaller numerical
// rank: with outer = V_r diag(l_r) V_r^dagger and W = V_r diag(sqrt l_r),
// sqrt(outer) inner sqrt(outer) has the same non-zero spectrum as the r x r
// matrix W^dagger inner W. Restricting to the support keeps round-off in the
// null space (which the square root would amplify to ~1e-8) out of the sum.
inline double uhlmann(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) {
    throw DimensionError("uhlmann: state dims " + std::to_string(rho.dim()) + " and " +
                         std::to_string(sigma.dim()) + " differ");
  }
  require_valid(rho, "uhlmann");
  require_valid(sigma, "uhlmann");

  const auto eig_rho = hermitian_eig(rho.matrix);
  const auto eig_sigma = hermitian_eig(sigma.matrix);
  auto rank_of = [](const EigenDecomposition& e) {
    return static_cast<std::size_t>(std::count_if(e.values.begin(), e.values.end(),
                                                  [](double l) { return l > kSupportTolerance; }));
  };
  const bool sigma_outer = rank_of(eig_sigma) < rank_of(eig_rho);
  const EigenDecomposition& outer_eig = sigma_outer ? eig_sigma : eig_rho;
  const ComplexMatrix& inner = sigma_outer ? rho.matrix : sigma.matrix;

  const std::size_t dim = rho.dim();
  std::vector<std::size_t> support;
  for (std::size_t k = 0; k < dim; ++k)
    if (outer_eig.values[k] > kSupportTolerance) support.push_back(k);
  if (support.empty()) return 0.0;

  ComplexMatrix w(dim, support.size());
  for (std::size_t c = 0; c < support.size(); ++c) {
    const double s = std::sqrt(outer_eig.values[support[c]]);
    for (std::size_t r = 0; r < dim; ++r) w(r, c) = outer_eig.vectors(r, support[c]) * s;
  }
  const ComplexMatrix reduced = hermitian_part(matmul(matmul(adjoint(w), inner), w));
  const auto eig = hermitian_eig(reduced);
  require_psd(eig, "uhlmann");
  double root_trace = 0.0;
  for (double l : eig.values) root_trace += l > 0.0 ? std::sqrt(l) : 0.0;
  return std::clamp(root_trace * root_trace, 0.0, 1.0);
}

// Tr[rho sigma] for a pure sigma; equals the Uhlmann fidelity in that case.
inline double overlap_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma_pure) {
  if (rho.dim() != sigma_pure.dim()) throw DimensionError("overlap_fidelity: dims differ");
  const double p = purity(sigma_pure);
  if (std::abs(p - 1.0) > 1e-9) {
    throw InvalidStateError("overlap_fidelity: reference state is not pure (purity " +
                            std::to_string(p) + ")");
  }
  return trace_of_product(rho.matrix, sigma_pure.matrix).real();
}

namespace detail {

inline void require_model_x(double x, const char* who) {
  if (!std::isfinite(x)) throw DomainError(std::string(who) + ": x must be finite");
  if (x < 0.0) throw DomainError(std::string(who) + ": x must be >= 0");
}

}  // namespace detail

// ln F_I = -n ln(1 + e^{-x}); finite for every admissible (x, n).
inline double log_scaling_fidelity(double x, std::uint64_t n) {
  detail::require_model_x(x, "scaling_fidelity");
  return -static_cast<double>(n) * std::log1p(std::exp(-x));
}

// (1 + e^{-x})^{-n}. Underflows to 0 only when the true value is below the
// smallest positive double.
inline double scaling_fidelity(double x, std::uint64_t n) {
  if (n == 0) {
    detail::require_model_x(x, "scaling_fidelity");
    return 1.0;
  }
  return std::exp(log_scaling_fidelity(x, n));
}

inline double initialization_fidelity(double x, std::uint64_t n) { return scaling_fidelity(x, n); }

// Heterogeneous register: product of per-qubit ground populations.
inline double initialization_fidelity(const ProductDiagonalState& s) {
  double log_f = 0.0;
  for (const auto& q : s.qubits) log_f -= std::log1p(std::exp(-q.x));
  return std::exp(log_f);
}

// eta = 1 - (1 + e^{-x})^{-1}, the excited population of one qubit.
inline double error_rate_from_x(double x) {
  detail::require_model_x(x, "error_rate_from_x");
  return 1.0 / (1.0 + std::exp(x));
}

inline double x_from_error_rate(double eta) {
  if (!(eta > 0.0) || eta > 0.5) {
    throw DomainError("x_from_error_rate: eta = " + std::to_string(eta) +
                      " outside (0, 0.5]; no x >= 0 produces it");
  }
  return std::log1p(-eta) - std::log(eta);
}

namespace detail {

inline std::vector<complex> prepared_state(const UnitaryOp& u) {
  std::vector<complex> psi(u.dim());
  for (std::size_t i = 0; i < u.dim(); ++i) psi[i] = u.matrix(i, 0);
  return psi;
}

inline void require_register_dims(const KrausChannel& c, const UnitaryOp& u, const char* who) {
  if (c.dim != u.dim()) {
    throw DimensionError(std::string(who) + ": channel dim " + std::to_string(c.dim) +
                         " vs unitary dim " + std::to_string(u.dim()));
  }
  (void)qubits_for_dim(u.dim());
}

}  // namespace detail

// <psi| Phi(rho0) |psi> with |psi> = U |0...0>. Phi is the whole noisy
// preparation, gate included (see noisy_gate).
inline double composite_fidelity(const KrausChannel& c, const UnitaryOp& u,
                                 const DensityMatrix& rho0) {
  detail::require_register_dims(c, u, "composite_fidelity");
  if (rho0.dim() != u.dim()) throw DimensionError("composite_fidelity: state dim mismatch");
  const auto psi = detail::prepared_state(u);
  const DensityMatrix rho1 = apply_channel(c, rho0);
  return std::clamp(sandwich(psi, rho1.matrix, psi).real(), 0.0, 1.0);
}

// F_P = <0| U^dagger Phi(sigma0) U |0>.
inline double preparation_fidelity(const KrausChannel& c, const UnitaryOp& u) {
  detail::require_register_dims(c, u, "preparation_fidelity");
  const std::size_t n = qubits_for_dim(u.dim());
  return composite_fidelity(c, u, target_register(n, n));
}

struct BoundReport {
  double f_composite = 0.0;
  double f_i = 0.0;
  double f_p = 0.0;
  double lower = 0.0;  // f_p * f_i
  double upper = 0.0;  // min(f_p, f_i)
  bool lower_ok = false;
  bool upper_ok = false;
  bool upper_fi_ok = false;  // f_composite <= f_i alone
  bool upper_fp_ok = false;  // f_composite <= f_p alone
  bool channel_unital = false;

  double lower_violation() const { return std::max(0.0, lower - f_composite); }
  double upper_violation() const { return std::max(0.0, f_composite - upper); }
};

inline constexpr double kBoundTolerance = 1e-9;

// Evaluates both sides of F_P F_I <= F <= min(F_P, F_I) for a thermal
// register. The lower bound holds for every channel when rho0 is diagonal;
// the upper bound is reported, not asserted.
inline BoundReport bound_check(const KrausChannel& c, const UnitaryOp& u, double x,
                               std::size_t n, std::size_t cap = kDefaultDenseCap) {
  require_dense_cap(n, cap, "bound_check");
  if (register_dim(n) != u.dim()) throw DimensionError("bound_check: n does not match unitary");
  BoundReport r;
  r.f_composite = composite_fidelity(c, u, to_dense(thermal_register(x, n), cap));
  r.f_i = initialization_fidelity(x, n);
  r.f_p = preparation_fidelity(c, u);
  r.lower = r.f_p * r.f_i;
  r.upper = std::min(r.f_p, r.f_i);
  r.lower_ok = r.f_composite >= r.lower - kBoundTolerance;
  r.upper_fi_ok = r.f_composite <= r.f_i + kBoundTolerance;
  r.upper_fp_ok = r.f_composite <= r.f_p + kBoundTolerance;
  r.upper_ok = r.upper_fi_ok && r.upper_fp_ok;
  r.channel_unital = is_unital(c);
  return r;
}

struct DepolarizingCheck {
  double f_i = 0.0;          // Tr[rho0 sigma0]
  double closed_form = 0.0;  // (1 - lambda) f_i + lambda / 2^n
  std::optional<double> dense;  // Tr[rho1 sigma1] from matrices, n <= 4
  bool inequality_holds = false;
  bool dense_matches = true;

  bool ok() const noexcept { return inequality_holds && dense_matches; }
  double dense_error() const { return dense ? std::abs(*dense - closed_form) : 0.0; }
};

inline constexpr std::size_t kDepolarizingDenseMaxQubits = 4;

// Checks Tr[rho1 sigma1] <= F_I for rho1 = E(U rho0 U^dagger), sigma1 =
// U sigma0 U^dagger with E the depolarizing channel. For n <= 4 the closed
// form is cross-checked against the dense evaluation (U defaults to I).
inline DepolarizingCheck depolarizing_inequality_check(double x, std::size_t n, double lambda,
                                                       const UnitaryOp* u = nullptr,
                                                       double tol = 1e-10) {
  if (n == 0) throw DomainError("depolarizing_inequality_check: n must be >= 1");
  const double max_lambda = depolarizing_max_lambda(n);
  if (!(lambda >= 0.0) || lambda > max_lambda * (1.0 + 1e-15)) {
    throw DomainError("depolarizing_inequality_check: lambda outside admissible range");
  }
  DepolarizingCheck r;
  r.f_i = initialization_fidelity(x, n);
  r.closed_form = (1.0 - lambda) * r.f_i + lambda * std::exp2(-static_cast<double>(n));
  r.inequality_holds = r.closed_form <= r.f_i + 1e-12;
  if (n <= kDepolarizingDenseMaxQubits) {
    const UnitaryOp identity = identity_unitary(register_dim(n));
    const UnitaryOp& gate = u ? *u : identity;
    if (gate.dim() != register_dim(n)) {
      throw DimensionError("depolarizing_inequality_check: unitary dim mismatch");
    }
    const DensityMatrix rho1 =
        apply_channel(depolarizing(lambda, n), apply_unitary(gate, to_dense(thermal_register(x, n), n)));
    const DensityMatrix sigma1 = apply_unitary(gate, target_register(n, n));
    r.dense = trace_of_product(rho1.matrix, sigma1.matrix).real();
    r.dense_matches = r.dense_error() <= tol;
    r.inequality_holds = r.inequality_holds && *r.dense <= r.f_i + tol;
  }
  return r;
}

}  // namespace thermoscale
