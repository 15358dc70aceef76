#pragma once

// Full eigendecomposition of dense real symmetric matrices, backed by
// LAPACK's divide-and-conquer driver (dsyevd).

#include <cblas.h>
#include <lapacke.h>

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmtlab/ensembles.hpp"

namespace rmtlab {

class EigenDecomposition {
 public:
  EigenDecomposition(int n, std::vector<double> eigenvalues, std::vector<double> vectors)
      : n_(n), eigenvalues_(std::move(eigenvalues)), vectors_(std::move(vectors)) {}

  [[nodiscard]] int size() const { return n_; }
  [[nodiscard]] std::span<const double> eigenvalues() const { return eigenvalues_; }
  [[nodiscard]] double eigenvalue(int alpha) const { return eigenvalues_[alpha]; }

  /// Psi(alpha) as a contiguous span of N components.
  [[nodiscard]] std::span<const double> eigenvector(int alpha) const {
    return {vectors_.data() + static_cast<std::size_t>(alpha) * n_, static_cast<std::size_t>(n_)};
  }

  /// Psi_j(alpha), 0-based.
  [[nodiscard]] double component(int j, int alpha) const {
    return vectors_[static_cast<std::size_t>(alpha) * n_ + j];
  }

 private:
  int n_;
  std::vector<double> eigenvalues_;
  std::vector<double> vectors_;  // column-major: column alpha is contiguous
};

namespace detail {

inline std::vector<double> checked_copy(const SymmetricMatrix& matrix) {
  const auto entries = matrix.entries();
  for (double v : entries) {
    if (!std::isfinite(v)) throw std::domain_error("eigh: matrix has non-finite entries");
  }
  return {entries.begin(), entries.end()};
}

}  // namespace detail

/// All eigenpairs, eigenvalues ascending. Each eigenvector's largest-magnitude
/// component is made positive (first such index on ties).
inline EigenDecomposition eigh(const SymmetricMatrix& matrix) {
  detail::pin_blas_threads();
  const int n = matrix.size();
  // Symmetric, so the row-major buffer is also the column-major one.
  std::vector<double> a = detail::checked_copy(matrix);
  std::vector<double> w(n);
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, w.data());
  if (info < 0) throw std::invalid_argument("eigh: dsyevd rejected argument " + std::to_string(-info));
  if (info > 0) throw std::runtime_error("eigh: eigensolver failed to converge (info=" + std::to_string(info) + ")");
  for (int alpha = 0; alpha < n; ++alpha) {
    double* col = a.data() + static_cast<std::size_t>(alpha) * n;
    int arg = 0;
    for (int j = 1; j < n; ++j) {
      if (std::abs(col[j]) > std::abs(col[arg])) arg = j;
    }
    if (col[arg] < 0.0) {
      for (int j = 0; j < n; ++j) col[j] = -col[j];
    }
  }
  return EigenDecomposition(n, std::move(w), std::move(a));
}

/// Eigenvalues only, ascending.
inline std::vector<double> eigvalsh(const SymmetricMatrix& matrix) {
  detail::pin_blas_threads();
  const int n = matrix.size();
  std::vector<double> a = detail::checked_copy(matrix);
  std::vector<double> w(n);
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, a.data(), n, w.data());
  if (info != 0) throw std::runtime_error("eigvalsh: eigensolver failed (info=" + std::to_string(info) + ")");
  return w;
}

}  // namespace rmtlab
