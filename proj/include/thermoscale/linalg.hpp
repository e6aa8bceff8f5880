#pragma once

// Minimal dense complex-matrix kernel: products, Kronecker products,
// Hermitian eigendecomposition (cyclic Jacobi) and PSD square roots.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "thermoscale/error.hpp"

namespace thermoscale {

using complex = std::complex<double>;

// Largest side length any single matrix may reach (2^14).
inline constexpr std::size_t kMaxMatrixSide = std::size_t{1} << 14;

// Eigenvalues below -kPsdTolerance signal an indefinite matrix; those in
// [-kPsdTolerance, 0) are treated as numerical noise and clamped.
inline constexpr double kPsdTolerance = 1e-10;
inline constexpr double kHermitianTolerance = 1e-10;

template <typename T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
    check_side(rows);
    check_side(cols);
    data_.assign(rows * cols, T{});
  }

  Matrix(std::size_t rows, std::size_t cols, std::vector<T> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    check_side(rows);
    check_side(cols);
    if (data_.size() != rows * cols) {
      throw DimensionError("matrix: " + std::to_string(data_.size()) +
                           " entries for a " + std::to_string(rows) + "x" +
                           std::to_string(cols) + " matrix");
    }
  }

  // Row-major nested initializer, e.g. {{0, 1}, {1, 0}}.
  Matrix(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw DimensionError("matrix: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  static Matrix diagonal(std::span<const double> values) {
    Matrix m(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = T{values[i]};
    return m;
  }
  static Matrix diagonal(std::initializer_list<double> values) {
    return diagonal(std::span<const double>(values.begin(), values.size()));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }
  std::span<const T> entries() const noexcept { return data_; }
  std::span<T> entries() noexcept { return data_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  Matrix& operator+=(const Matrix& o) {
    require_same_shape(o, "+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    require_same_shape(o, "-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Matrix& operator*=(T s) {
    for (auto& v : data_) v *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, T s) { return a *= s; }
  friend Matrix operator*(T s, Matrix a) { return a *= s; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  static void check_side(std::size_t n) {
    if (n > kMaxMatrixSide) {
      throw DimensionError("matrix side " + std::to_string(n) + " exceeds cap " +
                           std::to_string(kMaxMatrixSide));
    }
  }
  void require_same_shape(const Matrix& o, const char* op) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) {
      throw DimensionError(std::string("matrix ") + op + ": shape mismatch");
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using ComplexMatrix = Matrix<complex>;

template <typename T>
Matrix<T> kron(const Matrix<T>& a, const Matrix<T>& b) {
  const std::size_t rows = a.rows() * b.rows();
  const std::size_t cols = a.cols() * b.cols();
  if (rows > kMaxMatrixSide || cols > kMaxMatrixSide) {
    throw DimensionError("kron: product dimension " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " exceeds cap");
  }
  Matrix<T> out(rows, cols);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const T aij = a(i, j);
      if (aij == T{}) continue;
      for (std::size_t k = 0; k < b.rows(); ++k) {
        for (std::size_t l = 0; l < b.cols(); ++l) {
          out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
      }
    }
  }
  return out;
}

// a^{(x)n}; n = 0 yields the 1x1 identity.
template <typename T>
Matrix<T> kron_power(const Matrix<T>& a, std::size_t n) {
  Matrix<T> out = Matrix<T>::identity(1);
  for (std::size_t i = 0; i < n; ++i) out = kron(out, a);
  return out;
}

template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions " + std::to_string(a.cols()) + " and " +
                         std::to_string(b.rows()) + " differ");
  }
  Matrix<T> out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T aik = a(i, k);
      if (aik == T{}) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

inline complex conj_of(complex v) { return std::conj(v); }
inline double conj_of(double v) { return v; }

template <typename T>
Matrix<T> adjoint(const Matrix<T>& a) {
  Matrix<T> out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = conj_of(a(i, j));
  return out;
}

template <typename T>
T trace(const Matrix<T>& a) {
  if (!a.square()) throw DimensionError("trace: matrix is not square");
  T acc{};
  for (std::size_t i = 0; i < a.rows(); ++i) acc += a(i, i);
  return acc;
}

// Tr[a b] without forming the product.
template <typename T>
T trace_of_product(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows() || a.rows() != b.cols()) {
    throw DimensionError("trace_of_product: shapes do not form a square product");
  }
  T acc{};
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, i);
  return acc;
}

template <typename T>
double max_abs_diff(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("max_abs_diff: shape mismatch");
  }
  double m = 0.0;
  auto ea = a.entries();
  auto eb = b.entries();
  for (std::size_t i = 0; i < ea.size(); ++i) m = std::max(m, std::abs(ea[i] - eb[i]));
  return m;
}

// max |a - a^dagger| entry.
inline double hermiticity_defect(const ComplexMatrix& a) {
  if (!a.square()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i; j < a.cols(); ++j)
      m = std::max(m, std::abs(a(i, j) - std::conj(a(j, i))));
  return m;
}

inline ComplexMatrix hermitian_part(const ComplexMatrix& a) {
  ComplexMatrix out = a + adjoint(a);
  out *= complex{0.5};
  return out;
}

inline ComplexMatrix outer(std::span<const complex> u, std::span<const complex> v) {
  ComplexMatrix out(u.size(), v.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out(i, j) = u[i] * std::conj(v[j]);
  return out;
}

inline std::vector<complex> apply(const ComplexMatrix& a, std::span<const complex> v) {
  if (a.cols() != v.size()) throw DimensionError("apply: vector length mismatch");
  std::vector<complex> out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[i] += a(i, j) * v[j];
  return out;
}

inline ComplexMatrix column(const ComplexMatrix& a, std::size_t c) {
  ComplexMatrix out(a.rows(), 1);
  for (std::size_t i = 0; i < a.rows(); ++i) out(i, 0) = a(i, c);
  return out;
}

// <u|a|v>
inline complex sandwich(std::span<const complex> u, const ComplexMatrix& a,
                        std::span<const complex> v) {
  auto av = apply(a, v);
  complex acc{};
  for (std::size_t i = 0; i < u.size(); ++i) acc += std::conj(u[i]) * av[i];
  return acc;
}

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  ComplexMatrix vectors;       // column k belongs to values[k]
};

// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
//
// Each rotation first removes the phase of a(p,q) and then applies the real
// symmetric Jacobi rotation, so one step is a unitary J with
//   J = [[c, s], [-s e^{-i phi}, c e^{-i phi}]]   on rows/cols (p, q).
inline EigenDecomposition hermitian_eig(const ComplexMatrix& input, int max_sweeps = 64) {
  if (!input.square()) throw DimensionError("hermitian_eig: matrix is not square");
  const double defect = hermiticity_defect(input);
  if (defect > kHermitianTolerance) {
    throw InvalidStateError("hermitian_eig: input not Hermitian (defect " +
                            std::to_string(defect) + ")");
  }
  const std::size_t n = input.rows();
  ComplexMatrix a = hermitian_part(input);
  ComplexMatrix v = ComplexMatrix::identity(n);

  double scale = 0.0;
  for (auto e : a.entries()) scale += std::norm(e);
  scale = std::sqrt(scale);

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += std::norm(a(i, j));
    return std::sqrt(2.0 * s);
  };

  bool converged = n <= 1 || scale == 0.0;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    if (off_norm() <= 1e-15 * scale) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const complex apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag <= 1e-300) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        // Skip rotations that cannot change the diagonal at working precision
        // (only after the first sweeps, as in the classical algorithm).
        if (sweep > 3 && mag * 1e18 < std::abs(app) && mag * 1e18 < std::abs(aqq)) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        const complex phase = apq / mag;  // e^{i phi}
        const double theta = (aqq - app) / (2.0 * mag);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const complex jpp = c;
        const complex jpq = s;
        const complex jqp = -s * std::conj(phase);
        const complex jqq = c * std::conj(phase);

        // a <- a J (columns p, q)
        for (std::size_t k = 0; k < n; ++k) {
          const complex akp = a(k, p);
          const complex akq = a(k, q);
          a(k, p) = akp * jpp + akq * jqp;
          a(k, q) = akp * jpq + akq * jqq;
        }
        // a <- J^dagger a (rows p, q)
        for (std::size_t k = 0; k < n; ++k) {
          const complex apk = a(p, k);
          const complex aqk = a(q, k);
          a(p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
          a(q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (std::size_t k = 0; k < n; ++k) {
          const complex vkp = v(k, p);
          const complex vkq = v(k, q);
          v(k, p) = vkp * jpp + vkq * jqp;
          v(k, q) = vkp * jpq + vkq * jqq;
        }
      }
    }
  }
  if (!converged && off_norm() > 1e-13 * scale) {
    throw ConvergenceError("hermitian_eig: Jacobi sweeps did not converge");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });

  EigenDecomposition out{std::vector<double>(n), ComplexMatrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]).real();
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

// V diag(f(lambda)) V^dagger
template <typename F>
ComplexMatrix spectral_map(const EigenDecomposition& eig, F&& f) {
  const std::size_t n = eig.values.size();
  ComplexMatrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double fk = f(eig.values[k]);
    if (fk == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const complex vik = eig.vectors(i, k) * fk;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += vik * std::conj(eig.vectors(j, k));
    }
  }
  return out;
}

inline void require_psd(const EigenDecomposition& eig, const char* who) {
  if (!eig.values.empty() && eig.values.front() < -kPsdTolerance) {
    throw InvalidStateError(std::string(who) + ": matrix is not positive semidefinite "
                            "(eigenvalue " + std::to_string(eig.values.front()) + ")");
  }
}

inline ComplexMatrix psd_sqrt(const ComplexMatrix& a) {
  auto eig = hermitian_eig(a);
  require_psd(eig, "psd_sqrt");
  return spectral_map(eig, [](double l) { return l > 0.0 ? std::sqrt(l) : 0.0; });
}

}  // namespace thermoscale
