#pragma once

// Power-law random banded matrices (PLBM) and ultrametric random matrices
// (UMM): variance profiles, matrix sampling, analytic localisation sums and
// trace moments.

#include <cblas.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmtlab/parallel.hpp"
#include "rmtlab/random.hpp"

namespace rmtlab {

enum class EnsembleKind { Plbm, Umm };

/// Off-diagonal decay profile used by PLBM.
enum class PlbmProfile {
  Periodic,  // eps [1 + ((N/pi) sin(pi r/N))^2]^(-s/2)
  Modular,   // eps (1 + (r mod N)^2)^(-s/2)
};

inline const char* to_string(EnsembleKind k) { return k == EnsembleKind::Plbm ? "plbm" : "umm"; }
inline const char* to_string(PlbmProfile p) {
  return p == PlbmProfile::Periodic ? "periodic" : "modular";
}

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::Plbm;
  int n_dim = 2;
  double s = 0.0;
  double epsilon = 1.0;
  std::uint64_t master_seed = 0;
  PlbmProfile profile = PlbmProfile::Periodic;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const {
    if (n_dim < 2) throw std::invalid_argument("N must be at least 2");
    if (kind == EnsembleKind::Umm && !std::has_single_bit(static_cast<unsigned>(n_dim))) {
      throw std::invalid_argument("N must be a power of two for the ultrametric ensemble, got " +
                                  std::to_string(n_dim));
    }
    if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("s must be nonnegative");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw std::invalid_argument("epsilon must be positive");
    }
  }

  /// Tree depth n with N = 2^n (UMM only).
  [[nodiscard]] int levels() const { return std::countr_zero(static_cast<unsigned>(n_dim)); }
};

/// Dense real symmetric matrix, row-major. Immutable once built.
class SymmetricMatrix {
 public:
  SymmetricMatrix(int n, std::vector<double> entries) : n_(n), entries_(std::move(entries)) {
    if (n < 1 || entries_.size() != static_cast<std::size_t>(n) * n) {
      throw std::invalid_argument("SymmetricMatrix: entry count does not match N*N");
    }
    for (int i = 0; i < n_; ++i) {
      for (int j = i + 1; j < n_; ++j) {
        if (std::bit_cast<std::uint64_t>((*this)(i, j)) != std::bit_cast<std::uint64_t>((*this)(j, i))) {
          throw std::invalid_argument("SymmetricMatrix: entries are not symmetric");
        }
      }
    }
  }

  [[nodiscard]] int size() const { return n_; }
  double operator()(int i, int j) const { return entries_[static_cast<std::size_t>(i) * n_ + j]; }
  [[nodiscard]] std::span<const double> entries() const { return entries_; }

  [[nodiscard]] double frobenius_norm() const {
    double sum = 0.0;
    for (double v : entries_) sum += v * v;
    return std::sqrt(sum);
  }

 private:
  int n_;
  std::vector<double> entries_;
};

inline double variance_profile_plbm(int r, const EnsembleSpec& spec) {
  if (spec.kind != EnsembleKind::Plbm) throw std::invalid_argument("variance_profile_plbm: not a PLBM spec");
  if (r < 0 || r >= spec.n_dim) {
    throw std::domain_error("variance_profile_plbm: offset out of range: " + std::to_string(r));
  }
  const double n = spec.n_dim;
  const double chord = (n / std::numbers::pi) * std::sin(std::numbers::pi * r / n);
  return spec.epsilon * std::pow(1.0 + chord * chord, -0.5 * spec.s);
}

inline double variance_profile_plbm_alt(long long r, const EnsembleSpec& spec) {
  if (spec.kind != EnsembleKind::Plbm) throw std::invalid_argument("variance_profile_plbm_alt: not a PLBM spec");
  if (r < 0) throw std::domain_error("variance_profile_plbm_alt: negative offset");
  const double m = static_cast<double>(r % spec.n_dim);
  return spec.epsilon * std::pow(1.0 + m * m, -0.5 * spec.s);
}

/// Ultrametric distance between leaves i and j (1-based) of a depth-n
/// binary tree: n minus the common prefix length of (i-1) and (j-1).
inline int ultrametric_distance(long long i, long long j, int n_levels) {
  if (n_levels < 0 || n_levels > 62) throw std::domain_error("ultrametric_distance: bad tree depth");
  const long long leaves = 1LL << n_levels;
  if (i < 1 || j < 1 || i > leaves || j > leaves) {
    throw std::domain_error("ultrametric_distance: leaf index out of range");
  }
  return std::bit_width(static_cast<std::uint64_t>((i - 1) ^ (j - 1)));
}

inline double variance_profile_umm(int i, int j, const EnsembleSpec& spec) {
  if (spec.kind != EnsembleKind::Umm) throw std::invalid_argument("variance_profile_umm: not a UMM spec");
  if (i == j) throw std::domain_error("variance_profile_umm: diagonal entries use a fixed variance");
  const int d = ultrametric_distance(i, j, spec.levels());
  return spec.epsilon * std::exp2(-spec.s * d);
}

/// Standard deviation of the off-diagonal entry (i, j), 0-based indices.
class OffDiagonalProfile {
 public:
  explicit OffDiagonalProfile(const EnsembleSpec& spec) : kind_(spec.kind) {
    if (spec.kind == EnsembleKind::Plbm) {
      table_.resize(spec.n_dim);
      for (int r = 0; r < spec.n_dim; ++r) {
        table_[r] = spec.profile == PlbmProfile::Periodic ? variance_profile_plbm(r, spec)
                                                          : variance_profile_plbm_alt(r, spec);
      }
    } else {
      const int levels = spec.levels();
      table_.resize(levels + 1);
      for (int d = 0; d <= levels; ++d) table_[d] = spec.epsilon * std::exp2(-spec.s * d);
    }
  }

  double operator()(int i, int j) const {
    if (kind_ == EnsembleKind::Plbm) return table_[static_cast<std::size_t>(std::abs(i - j))];
    return table_[std::bit_width(static_cast<unsigned>(i ^ j))];
  }

 private:
  EnsembleKind kind_;
  std::vector<double> table_;
};

namespace detail {

// Parallelism lives at the realisation level; BLAS calls run single-threaded
// so every matrix product and decomposition is bitwise reproducible.
inline void pin_blas_threads() {
  static std::once_flag once;
  std::call_once(once, [] { openblas_set_num_threads(1); });
}

}  // namespace detail

inline constexpr double kDiagonalVariance = 2.0;

/// One realisation. Entries are drawn in row-major upper-triangle order
/// (diagonal included) from the stream keyed by (master_seed, index).
inline SymmetricMatrix sample_matrix(const EnsembleSpec& spec, std::uint64_t realization_index) {
  spec.validate();
  const int n = spec.n_dim;
  const OffDiagonalProfile profile(spec);
  CounterRng rng(derive_stream_key(spec.master_seed, realization_index));
  const double diag_sd = std::sqrt(kDiagonalVariance);
  std::vector<double> h(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    h[static_cast<std::size_t>(i) * n + i] = diag_sd * rng.normal();
    for (int j = i + 1; j < n; ++j) {
      const double v = profile(i, j) * rng.normal();
      h[static_cast<std::size_t>(i) * n + j] = v;
      h[static_cast<std::size_t>(j) * n + i] = v;
    }
  }
  return SymmetricMatrix(n, std::move(h));
}

enum class Regime { Localized, Intermediate, GoeLike };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::Localized: return "localized";
    case Regime::Intermediate: return "intermediate";
    case Regime::GoeLike: return "goe-like";
  }
  return "unknown";
}

struct RegimeReport {
  double s1;
  double s2;
  Regime regime;
};

/// Strict inequalities decide the outer regimes; the boundary points
/// s = 1/2 and s = 1 are reported as Intermediate.
inline Regime classify_regime(double s) {
  if (s > 1.0) return Regime::Localized;
  if (s < 0.5) return Regime::GoeLike;
  return Regime::Intermediate;
}

/// S1(N) = (1/N) sum <|H_ij|>, S2(N) = (1/N) sum <H_ij^2>, computed exactly
/// from the variance profile.
inline RegimeReport localization_diagnostics(const EnsembleSpec& spec) {
  spec.validate();
  const double n = spec.n_dim;
  const double half_normal = std::sqrt(2.0 / std::numbers::pi);
  double off_abs = 0.0;
  double off_sq = 0.0;
  if (spec.kind == EnsembleKind::Plbm) {
    for (int r = 1; r < spec.n_dim; ++r) {
      const double a = spec.profile == PlbmProfile::Periodic ? variance_profile_plbm(r, spec)
                                                             : variance_profile_plbm_alt(r, spec);
      const double pairs = 2.0 * (n - r);
      off_abs += pairs * a;
      off_sq += pairs * a * a;
    }
  } else {
    for (int d = 1; d <= spec.levels(); ++d) {
      const double a = spec.epsilon * std::exp2(-spec.s * d);
      const double pairs = n * std::exp2(d - 1);
      off_abs += pairs * a;
      off_sq += pairs * a * a;
    }
  }
  const double diag_sd = std::sqrt(kDiagonalVariance);
  RegimeReport report{};
  report.s1 = half_normal * (n * diag_sd + off_abs) / n;
  report.s2 = (n * kDiagonalVariance + off_sq) / n;
  report.regime = classify_regime(spec.s);
  return report;
}

struct Estimate {
  double mean = 0.0;
  double standard_error = 0.0;
  int count = 0;
};

inline Estimate estimate_mean(std::span<const double> values) {
  Estimate e;
  e.count = static_cast<int>(values.size());
  if (values.empty()) return e;
  double sum = 0.0;
  for (double v : values) sum += v;
  e.mean = sum / values.size();
  if (values.size() < 2) {
    e.standard_error = std::numeric_limits<double>::quiet_NaN();
    return e;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - e.mean) * (v - e.mean);
  e.standard_error = std::sqrt(ss / (values.size() - 1) / values.size());
  return e;
}

/// (1/N) Tr H^n for one matrix, using symmetric powers:
/// Tr H^{2k} = ||H^k||_F^2 and Tr H^{2k+1} = <H^k, H^{k+1}>_F.
inline double normalized_trace_power(const SymmetricMatrix& h, int order) {
  if (order < 1) throw std::invalid_argument("normalized_trace_power: order must be >= 1");
  detail::pin_blas_threads();
  const int n = h.size();
  const auto entries = h.entries();
  if (order == 1) {
    double tr = 0.0;
    for (int i = 0; i < n; ++i) tr += h(i, i);
    return tr / n;
  }
  const int k = order / 2;
  std::vector<double> power(entries.begin(), entries.end());
  std::vector<double> next(power.size());
  for (int step = 1; step < k; ++step) {
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, n, n, n, 1.0, power.data(), n,
                entries.data(), n, 0.0, next.data(), n);
    power.swap(next);
  }
  double tr = 0.0;
  if (order % 2 == 0) {
    for (double v : power) tr += v * v;
  } else {
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, n, n, n, 1.0, power.data(), n,
                entries.data(), n, 0.0, next.data(), n);
    for (std::size_t i = 0; i < power.size(); ++i) tr += power[i] * next[i];
  }
  return tr / n;
}

/// Monte Carlo estimate of mu_n = (1/N) <Tr H^n> over realisations 0..count-1.
inline Estimate trace_moment(const EnsembleSpec& spec, int order, int realizations, int threads = 1) {
  if (order < 1) throw std::invalid_argument("trace_moment: order must be >= 1");
  if (realizations < 1) throw std::invalid_argument("trace_moment: need at least one realisation");
  const auto values = parallel_map(realizations, threads, [&](std::size_t r) {
    return normalized_trace_power(sample_matrix(spec, r), order);
  });
  return estimate_mean(values);
}

}  // namespace rmtlab
