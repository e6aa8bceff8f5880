#pragma once

// Quantum maps on dense registers: unitaries, Kraus channels, the
// depolarizing channel, and seeded random ensembles of each.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "thermoscale/error.hpp"
#include "thermoscale/linalg.hpp"
#include "thermoscale/rng.hpp"
#include "thermoscale/states.hpp"

namespace thermoscale {

inline constexpr double kUnitaryTolerance = 1e-10;
inline constexpr double kCompletenessTolerance = 1e-9;

struct UnitaryOp {
  ComplexMatrix matrix;

  std::size_t dim() const noexcept { return matrix.rows(); }
};

// max |U^dagger U - I|
inline double unitarity_defect(const ComplexMatrix& u) {
  if (!u.square()) return INFINITY;
  return max_abs_diff(matmul(adjoint(u), u), ComplexMatrix::identity(u.rows()));
}

inline UnitaryOp make_unitary(ComplexMatrix m) {
  const double defect = unitarity_defect(m);
  if (defect > kUnitaryTolerance) {
    throw InvalidStateError("make_unitary: U^dagger U deviates from I by " +
                            std::to_string(defect));
  }
  return UnitaryOp{std::move(m)};
}

inline UnitaryOp identity_unitary(std::size_t dim) {
  return UnitaryOp{ComplexMatrix::identity(dim)};
}

namespace gates {

inline ComplexMatrix x() { return ComplexMatrix{{0.0, 1.0}, {1.0, 0.0}}; }
inline ComplexMatrix y() { return ComplexMatrix{{0.0, complex{0, -1}}, {complex{0, 1}, 0.0}}; }
inline ComplexMatrix z() { return ComplexMatrix{{1.0, 0.0}, {0.0, -1.0}}; }
inline ComplexMatrix hadamard() {
  const double s = 1.0 / std::sqrt(2.0);
  return ComplexMatrix{{s, s}, {s, -s}};
}

// Pauli string on n qubits; `index` read as base-4 digits (I, X, Y, Z),
// most significant digit acting on qubit 0.
inline ComplexMatrix pauli_string(std::size_t index, std::size_t n) {
  ComplexMatrix out = ComplexMatrix::identity(1);
  std::size_t place = 1;
  for (std::size_t k = 1; k < n; ++k) place *= 4;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t digit = (index / place) % 4;
    place /= 4;
    switch (digit) {
      case 0: out = kron(out, ComplexMatrix::identity(2)); break;
      case 1: out = kron(out, x()); break;
      case 2: out = kron(out, y()); break;
      default: out = kron(out, z()); break;
    }
  }
  return out;
}

}  // namespace gates

// A CPTP map. Normally a list of Kraus operators; the depolarizing channel on
// large registers is instead carried in affine form
//   rho -> (1 - lambda) rho + lambda Tr[rho] I / d
// with kraus_ops left empty.
struct KrausChannel {
  std::vector<ComplexMatrix> kraus_ops;
  std::string label;
  std::size_t dim = 0;
  std::optional<double> affine_depolarizing;

  bool is_affine() const noexcept { return affine_depolarizing.has_value(); }
};

// max |sum K^dagger K - I|
inline double completeness_defect(const KrausChannel& c) {
  if (c.is_affine()) return 0.0;
  ComplexMatrix acc(c.dim, c.dim);
  for (const auto& k : c.kraus_ops) acc += matmul(adjoint(k), k);
  return max_abs_diff(acc, ComplexMatrix::identity(c.dim));
}

// max |sum K K^dagger - I|
inline double unitality_defect(const KrausChannel& c) {
  if (c.is_affine()) return 0.0;
  ComplexMatrix acc(c.dim, c.dim);
  for (const auto& k : c.kraus_ops) acc += matmul(k, adjoint(k));
  return max_abs_diff(acc, ComplexMatrix::identity(c.dim));
}

inline bool is_unital(const KrausChannel& c) {
  return unitality_defect(c) <= kCompletenessTolerance;
}

inline KrausChannel make_channel(std::vector<ComplexMatrix> ops, std::string label) {
  if (ops.empty()) throw InvalidStateError("make_channel: no Kraus operators");
  const std::size_t dim = ops.front().rows();
  for (const auto& k : ops) {
    if (k.rows() != dim || k.cols() != dim) {
      throw DimensionError("make_channel: Kraus operators must share one square dimension");
    }
  }
  KrausChannel c{std::move(ops), std::move(label), dim, std::nullopt};
  const double defect = completeness_defect(c);
  if (defect > kCompletenessTolerance) {
    throw InvalidStateError("make_channel: Kraus set incomplete (defect " +
                            std::to_string(defect) + ")");
  }
  return c;
}

inline KrausChannel unitary_channel(const UnitaryOp& u, std::string label = "unitary") {
  return KrausChannel{{u.matrix}, std::move(label), u.dim(), std::nullopt};
}

// The noisy implementation of a gate: rho -> noise(U rho U^dagger), Kraus
// operators K_i U.
inline KrausChannel noisy_gate(const KrausChannel& noise, const UnitaryOp& u) {
  if (noise.dim != u.dim()) throw DimensionError("noisy_gate: channel and unitary dims differ");
  if (noise.is_affine()) {
    throw DomainError("noisy_gate: affine channels have no Kraus operators to compose");
  }
  std::vector<ComplexMatrix> ops;
  ops.reserve(noise.kraus_ops.size());
  for (const auto& k : noise.kraus_ops) ops.push_back(matmul(k, u.matrix));
  return KrausChannel{std::move(ops), noise.label + " after gate", noise.dim, std::nullopt};
}

inline DensityMatrix apply_unitary(const UnitaryOp& u, const DensityMatrix& rho) {
  if (u.dim() != rho.dim()) {
    throw DimensionError("apply_unitary: unitary dim " + std::to_string(u.dim()) +
                         " vs state dim " + std::to_string(rho.dim()));
  }
  return DensityMatrix{matmul(matmul(u.matrix, rho.matrix), adjoint(u.matrix)), rho.n_qubits};
}

inline DensityMatrix apply_channel(const KrausChannel& c, const DensityMatrix& rho) {
  if (c.dim != rho.dim()) {
    throw DimensionError("apply_channel: channel dim " + std::to_string(c.dim) +
                         " vs state dim " + std::to_string(rho.dim()));
  }
  if (c.is_affine()) {
    const double lambda = *c.affine_depolarizing;
    ComplexMatrix out = rho.matrix * complex{1.0 - lambda};
    const complex mixed = lambda * trace(rho.matrix) / static_cast<double>(c.dim);
    for (std::size_t i = 0; i < c.dim; ++i) out(i, i) += mixed;
    return DensityMatrix{std::move(out), rho.n_qubits};
  }
  const double defect = completeness_defect(c);
  if (defect > kCompletenessTolerance) {
    throw InvalidStateError("apply_channel: Kraus set incomplete (defect " +
                            std::to_string(defect) + ")");
  }
  ComplexMatrix out(c.dim, c.dim);
  for (const auto& k : c.kraus_ops) out += matmul(matmul(k, rho.matrix), adjoint(k));
  return DensityMatrix{std::move(out), rho.n_qubits};
}

// Largest depolarizing strength that keeps the map CPTP: 4^n / (4^n - 1).
inline double depolarizing_max_lambda(std::size_t n) {
  return 1.0 / (1.0 - std::pow(4.0, -static_cast<double>(n)));
}

// Registers up to this size get an explicit Pauli-mixture Kraus set.
inline constexpr std::size_t kDepolarizingKrausMaxQubits = 3;

// (1 - lambda) rho + lambda Tr[rho] I / 2^n.
//
// For n <= 3 this is realized as a Pauli mixture: identity weight
// 1 - lambda (4^n - 1) / 4^n and weight lambda / 4^n on every other Pauli
// string. Both weights are non-negative over the whole admissible range of
// lambda, including lambda > 1. Larger registers use the affine form.
inline KrausChannel depolarizing(double lambda, std::size_t n) {
  if (n == 0) throw DomainError("depolarizing: register needs at least one qubit");
  if (n > 14) throw DimensionError("depolarizing: register too large for dense application");
  const double max_lambda = depolarizing_max_lambda(n);
  if (!(lambda >= 0.0) || lambda > max_lambda * (1.0 + 1e-15)) {
    throw DomainError("depolarizing: lambda = " + std::to_string(lambda) +
                      " outside [0, " + std::to_string(max_lambda) + "]");
  }
  lambda = std::min(lambda, max_lambda);
  const std::string label = "depolarizing(" + std::to_string(lambda) + ")";
  if (n > kDepolarizingKrausMaxQubits) {
    return KrausChannel{{}, label, register_dim(n), lambda};
  }
  const std::size_t strings = std::size_t{1} << (2 * n);
  const double other_weight = lambda / static_cast<double>(strings);
  const double identity_weight =
      std::max(0.0, 1.0 - lambda * static_cast<double>(strings - 1) / static_cast<double>(strings));
  std::vector<ComplexMatrix> ops;
  ops.reserve(strings);
  ops.push_back(ComplexMatrix::identity(register_dim(n)) * complex{std::sqrt(identity_weight)});
  if (other_weight > 0.0) {
    for (std::size_t s = 1; s < strings; ++s) {
      ops.push_back(gates::pauli_string(s, n) * complex{std::sqrt(other_weight)});
    }
  }
  return KrausChannel{std::move(ops), label, register_dim(n), std::nullopt};
}

inline KrausChannel mixed_unitary(std::span<const double> probs,
                                  std::span<const UnitaryOp> unitaries) {
  if (probs.size() != unitaries.size() || probs.empty()) {
    throw DimensionError("mixed_unitary: need one probability per unitary");
  }
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw DomainError("mixed_unitary: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError("mixed_unitary: probabilities sum to " + std::to_string(total));
  }
  const std::size_t dim = unitaries.front().dim();
  std::vector<ComplexMatrix> ops;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (unitaries[i].dim() != dim) throw DimensionError("mixed_unitary: unitary dims differ");
    if (probs[i] == 0.0) continue;
    ops.push_back(unitaries[i].matrix * complex{std::sqrt(probs[i])});
  }
  return KrausChannel{std::move(ops), "mixed-unitary", dim, std::nullopt};
}

// Kraus ops {|psi><k|}: every input state is replaced by |psi><psi|.
inline KrausChannel replacement_channel(std::span<const complex> psi) {
  double norm2 = 0.0;
  for (complex a : psi) norm2 += std::norm(a);
  if (psi.empty() || std::abs(norm2 - 1.0) > 1e-10) {
    throw InvalidStateError("replacement_channel: |psi|^2 = " + std::to_string(norm2));
  }
  const std::size_t dim = psi.size();
  std::vector<ComplexMatrix> ops;
  ops.reserve(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    ComplexMatrix op(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) op(i, k) = psi[i];
    ops.push_back(std::move(op));
  }
  return KrausChannel{std::move(ops), "replacement", dim, std::nullopt};
}

// ---------------------------------------------------------------------------
// Random ensembles
// ---------------------------------------------------------------------------

namespace detail {

// Orthonormalize the columns of `g` in place (modified Gram-Schmidt, run
// twice). The implied R has a positive real diagonal, which is the phase
// convention under which Q from a Ginibre matrix is Haar distributed.
inline void orthonormalize_columns(ComplexMatrix& g) {
  const std::size_t rows = g.rows();
  const std::size_t cols = g.cols();
  for (std::size_t j = 0; j < cols; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        complex proj{};
        for (std::size_t i = 0; i < rows; ++i) proj += std::conj(g(i, k)) * g(i, j);
        for (std::size_t i = 0; i < rows; ++i) g(i, j) -= proj * g(i, k);
      }
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < rows; ++i) norm += std::norm(g(i, j));
    norm = std::sqrt(norm);
    if (norm == 0.0) throw ConvergenceError("orthonormalize_columns: rank-deficient sample");
    for (std::size_t i = 0; i < rows; ++i) g(i, j) /= norm;
  }
}

inline ComplexMatrix ginibre(std::size_t rows, std::size_t cols, Rng& rng) {
  ComplexMatrix g(rows, cols);
  for (auto& e : g.entries()) e = rng.complex_normal();
  return g;
}

// First `cols` columns of a Haar unitary of size `rows`.
inline ComplexMatrix haar_isometry(std::size_t rows, std::size_t cols, Rng& rng) {
  ComplexMatrix g = ginibre(rows, cols, rng);
  orthonormalize_columns(g);
  return g;
}

}  // namespace detail

inline UnitaryOp haar_random_unitary(std::size_t dim, Rng& rng) {
  if (dim == 0) throw DomainError("haar_random_unitary: dim must be >= 1");
  return UnitaryOp{detail::haar_isometry(dim, dim, rng)};
}

inline UnitaryOp haar_random_unitary(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  return haar_random_unitary(dim, rng);
}

// Stinespring construction: a Haar isometry V from dim to dim*rank, cut into
// rank blocks of dim rows; sum_j K_j^dagger K_j = V^dagger V = I.
inline KrausChannel random_kraus_channel(std::size_t dim, std::size_t rank, Rng& rng) {
  if (dim == 0 || rank == 0) throw DomainError("random_kraus_channel: dim and rank must be >= 1");
  const ComplexMatrix v = detail::haar_isometry(dim * rank, dim, rng);
  std::vector<ComplexMatrix> ops;
  ops.reserve(rank);
  for (std::size_t j = 0; j < rank; ++j) {
    ComplexMatrix k(dim, dim);
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dim; ++c) k(r, c) = v(j * dim + r, c);
    ops.push_back(std::move(k));
  }
  return KrausChannel{std::move(ops), "random-kraus(rank " + std::to_string(rank) + ")", dim,
                      std::nullopt};
}

inline KrausChannel random_kraus_channel(std::size_t dim, std::size_t rank, std::uint64_t seed) {
  Rng rng(seed);
  return random_kraus_channel(dim, rank, rng);
}

// Normalized complex Gaussian vector (Haar-random pure state).
inline std::vector<complex> random_pure_state(std::size_t dim, Rng& rng) {
  std::vector<complex> v(dim);
  double norm = 0.0;
  for (auto& a : v) {
    a = rng.complex_normal();
    norm += std::norm(a);
  }
  norm = std::sqrt(norm);
  for (auto& a : v) a /= norm;
  return v;
}

// G G^dagger / Tr with G a dim x rank Ginibre matrix (rank = dim gives the
// Hilbert-Schmidt ensemble).
inline DensityMatrix random_density_matrix(std::size_t dim, Rng& rng, std::size_t rank = 0) {
  if (rank == 0) rank = dim;
  const ComplexMatrix g = detail::ginibre(dim, rank, rng);
  ComplexMatrix rho = matmul(g, adjoint(g));
  rho = hermitian_part(rho);
  const double tr = trace(rho).real();
  rho *= complex{1.0 / tr};
  return make_density(std::move(rho));
}

inline DensityMatrix pure_density(std::span<const complex> psi) {
  return make_density(outer(psi, psi));
}

}  // namespace thermoscale
