#pragma once

// Register states: the ideal all-ground register, thermal registers in
// compact product form, and coherence-perturbed qubits.
//
// Basis convention: computational index 0 is the ground state |0>, so the
// ideal register is the projector with a single 1 at (0, 0).

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "thermoscale/error.hpp"
#include "thermoscale/linalg.hpp"

namespace thermoscale {

// Default largest register expanded to a dense 2^N x 2^N matrix.
inline constexpr std::size_t kDefaultDenseCap = 7;

inline std::size_t register_dim(std::size_t n_qubits) { return std::size_t{1} << n_qubits; }

// Number of qubits for a dimension that must be a power of two.
inline std::size_t qubits_for_dim(std::size_t dim) {
  if (dim == 0 || (dim & (dim - 1)) != 0) {
    throw DimensionError("dimension " + std::to_string(dim) + " is not a power of two");
  }
  std::size_t n = 0;
  while ((std::size_t{1} << n) < dim) ++n;
  return n;
}

inline void require_dense_cap(std::size_t n, std::size_t cap, const char* who) {
  if (n > cap) {
    throw DimensionError(std::string(who) + ": " + std::to_string(n) +
                         " qubits exceeds dense cap " + std::to_string(cap));
  }
}

// A qubit in the Gibbs state at dimensionless inverse temperature x = beta*dE.
struct ThermalQubit {
  double x = 0.0;
  double p_ground = 0.5;
  double p_excited = 0.5;
};

inline ThermalQubit thermal_qubit(double x) {
  if (!std::isfinite(x)) throw DomainError("thermal_qubit: x must be finite");
  if (x < 0.0) {
    throw DomainError("thermal_qubit: x = " + std::to_string(x) +
                      " < 0 describes a population inversion");
  }
  // p_excited = e^{-x} / (1 + e^{-x}) = 1 / (1 + e^{x})
  const double p_excited = 1.0 / (1.0 + std::exp(x));
  return ThermalQubit{x, 1.0 - p_excited, p_excited};
}

// Tensor product of diagonal qubit states, stored per qubit.
struct ProductDiagonalState {
  std::vector<ThermalQubit> qubits;

  std::size_t size() const noexcept { return qubits.size(); }

  // <0...0| rho |0...0>, evaluated in log space.
  double ground_population() const {
    double log_p = 0.0;
    for (const auto& q : qubits) log_p += std::log(q.p_ground);
    return std::exp(log_p);
  }
};

inline ProductDiagonalState thermal_register(double x, std::size_t n) {
  if (n == 0) throw DomainError("thermal_register: register needs at least one qubit");
  return ProductDiagonalState{std::vector<ThermalQubit>(n, thermal_qubit(x))};
}

// Heterogeneous register: one x per qubit.
inline ProductDiagonalState thermal_register(std::span<const double> xs) {
  if (xs.empty()) throw DomainError("thermal_register: register needs at least one qubit");
  ProductDiagonalState s;
  s.qubits.reserve(xs.size());
  for (double x : xs) s.qubits.push_back(thermal_qubit(x));
  return s;
}

// Dense density operator on n_qubits qubits. Construction does not validate;
// call validate() for the Hermitian / trace / PSD checks.
struct DensityMatrix {
  ComplexMatrix matrix;
  std::size_t n_qubits = 0;

  std::size_t dim() const noexcept { return matrix.rows(); }
};

inline DensityMatrix make_density(ComplexMatrix m) {
  if (!m.square()) throw DimensionError("density matrix must be square");
  const std::size_t n = qubits_for_dim(m.rows());
  return DensityMatrix{std::move(m), n};
}

inline DensityMatrix to_dense(const ProductDiagonalState& s,
                              std::size_t cap = kDefaultDenseCap) {
  require_dense_cap(s.size(), cap, "to_dense");
  const std::size_t dim = register_dim(s.size());
  ComplexMatrix m(dim, dim);
  for (std::size_t idx = 0; idx < dim; ++idx) {
    double p = 1.0;
    // qubit 0 is the most significant bit, matching kron(q0, q1, ...)
    for (std::size_t k = 0; k < s.size(); ++k) {
      const bool excited = (idx >> (s.size() - 1 - k)) & 1U;
      p *= excited ? s.qubits[k].p_excited : s.qubits[k].p_ground;
    }
    m(idx, idx) = p;
  }
  return DensityMatrix{std::move(m), s.size()};
}

inline DensityMatrix target_register(std::size_t n, std::size_t cap = kDefaultDenseCap) {
  require_dense_cap(n, cap, "target_register");
  const std::size_t dim = register_dim(n);
  ComplexMatrix m(dim, dim);
  m(0, 0) = 1.0;
  return DensityMatrix{std::move(m), n};
}

// Single qubit (1/Z) [[1, conj(eps)], [eps, e^{-x}]] with Z = 1 + e^{-x}:
// the thermal populations plus residual coherence eps.
inline DensityMatrix coherent_qubit(double x, complex eps) {
  const ThermalQubit q = thermal_qubit(x);
  const double boltzmann = std::exp(-x);
  if (!std::isfinite(eps.real()) || !std::isfinite(eps.imag())) {
    throw DomainError("coherent_qubit: eps must be finite");
  }
  if (std::norm(eps) > boltzmann) {
    throw InvalidStateError("coherent_qubit: |eps|^2 = " + std::to_string(std::norm(eps)) +
                            " exceeds e^{-x} = " + std::to_string(boltzmann) +
                            "; state would not be positive semidefinite");
  }
  // Normalize via the populations so the diagonal matches thermal_qubit exactly.
  const double inv_z = q.p_ground;
  ComplexMatrix m{{q.p_ground, std::conj(eps) * inv_z}, {eps * inv_z, q.p_excited}};
  return DensityMatrix{std::move(m), 1};
}

// Product of coherent qubits; one eps per qubit.
inline DensityMatrix coherent_register(double x, std::span<const complex> eps,
                                       std::size_t cap = kDefaultDenseCap) {
  if (eps.empty()) throw DomainError("coherent_register: register needs at least one qubit");
  require_dense_cap(eps.size(), cap, "coherent_register");
  ComplexMatrix m = ComplexMatrix::identity(1);
  for (complex e : eps) m = kron(m, coherent_qubit(x, e).matrix);
  return DensityMatrix{std::move(m), eps.size()};
}

inline double purity(const DensityMatrix& rho) {
  return trace_of_product(rho.matrix, rho.matrix).real();
}

struct ValidationReport {
  bool hermitian = true;
  bool unit_trace = true;
  bool positive = true;
  double hermiticity_defect = 0.0;
  double trace_error = 0.0;
  double min_eigenvalue = 0.0;
  std::vector<std::string> failures;  // "hermitian", "trace", "psd"

  bool ok() const noexcept { return failures.empty(); }
};

inline ValidationReport validate(const DensityMatrix& rho, double tol = 1e-10) {
  ValidationReport r;
  if (!rho.matrix.square()) {
    r.hermitian = r.unit_trace = r.positive = false;
    r.failures = {"square"};
    return r;
  }
  r.hermiticity_defect = hermiticity_defect(rho.matrix);
  r.hermitian = r.hermiticity_defect <= tol;
  const complex tr = trace(rho.matrix);
  r.trace_error = std::abs(tr - complex{1.0});
  r.unit_trace = r.trace_error <= tol;
  if (r.hermitian) {
    const auto eig = hermitian_eig(rho.matrix);
    r.min_eigenvalue = eig.values.empty() ? 0.0 : eig.values.front();
    r.positive = r.min_eigenvalue >= -tol;
  } else {
    r.positive = false;
  }
  if (!r.hermitian) r.failures.emplace_back("hermitian");
  if (!r.unit_trace) r.failures.emplace_back("trace");
  if (!r.positive) r.failures.emplace_back("psd");
  return r;
}

inline void require_valid(const DensityMatrix& rho, const char* who) {
  const auto r = validate(rho);
  if (!r.ok()) {
    std::string what = std::string(who) + ": invalid density matrix (";
    for (std::size_t i = 0; i < r.failures.size(); ++i) {
      if (i) what += ", ";
      what += r.failures[i];
    }
    throw InvalidStateError(what + ")");
  }
}

}  // namespace thermoscale
