#pragma once

// Monte Carlo pipelines over realisations: rescaled eigenvector components,
// local eigenvector variances, N-independence scans and fractal prefactors.
//
// One work unit is (sample matrix, decompose, extract) for a single
// realisation index; units run on a worker pool and are merged in index
// order, so every output is independent of the thread count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmtlab/distributions.hpp"
#include "rmtlab/eigensolve.hpp"
#include "rmtlab/ensembles.hpp"
#include "rmtlab/histogram.hpp"
#include "rmtlab/parallel.hpp"

namespace rmtlab {

/// Sorted-eigenvalue index window.
struct SpectralWindow {
  enum class Mode { MiddleHalf, CenteredCount };
  Mode mode = Mode::MiddleHalf;
  int m_window = 0;  // CenteredCount only

  static SpectralWindow middle_half() { return {}; }
  static SpectralWindow centered(int m) { return {Mode::CenteredCount, m}; }

  /// 0-based half-open index range [first, last).
  [[nodiscard]] std::pair<int, int> range(int n) const {
    if (mode == Mode::MiddleHalf) return {n / 4, 3 * n / 4};
    if (m_window < 1 || m_window > n) {
      throw std::invalid_argument("SpectralWindow: M_I must lie in [1, N], got " + std::to_string(m_window));
    }
    const int first = n / 2 - m_window / 2;
    return {first, first + m_window};
  }

  [[nodiscard]] int size(int n) const {
    const auto [a, b] = range(n);
    return b - a;
  }

  [[nodiscard]] std::string describe() const {
    return mode == Mode::MiddleHalf ? "middle-half" : "centered:" + std::to_string(m_window);
  }
};

/// {1, N/4, N/2}, 1-based.
inline std::vector<int> default_component_indices(int n) { return {1, n / 4, n / 2}; }

/// {1, N/8, 2N/8, ..., N}, 1-based.
inline std::vector<int> default_variance_components(int n) {
  std::vector<int> out{1};
  for (int k = 1; k <= 8; ++k) out.push_back(k * n / 8);
  return out;
}

/// `count` indices spread evenly over [1, N]: 1 + k*N/count.
inline std::vector<int> evenly_spaced_components(int n, int count) {
  if (count < 1 || count > n) throw std::invalid_argument("evenly_spaced_components: bad count");
  std::vector<int> out(count);
  for (int k = 0; k < count; ++k) out[k] = 1 + static_cast<int>(static_cast<long long>(k) * n / count);
  return out;
}

struct ComponentSampleSet {
  std::vector<double> values;  // x = sqrt(N) Psi_j(alpha)
  EnsembleSpec spec;
  SpectralWindow window;
  std::vector<int> component_indices;
  int realisations = 0;
};

struct VarianceSampleSet {
  std::vector<double> values;  // window averages of N |Psi_i|^2
  EnsembleSpec spec;
  SpectralWindow window;
  std::vector<int> component_indices;
  int realisations = 0;
};

/// What to extract from each decomposition.
struct SampleRequest {
  std::optional<SpectralWindow> component_window;
  std::vector<int> component_indices;   // 1-based
  std::vector<int> variance_windows;    // M_I values, centred windows
  std::vector<int> variance_components;  // 1-based
};

struct SampleBundle {
  std::optional<ComponentSampleSet> components;
  std::vector<VarianceSampleSet> variances;  // one per requested M_I
};

class RealisationError : public std::runtime_error {
 public:
  RealisationError(std::size_t index, const std::string& what)
      : std::runtime_error("realisation " + std::to_string(index) + ": " + what), index_(index) {}
  [[nodiscard]] std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

namespace detail {

inline void check_components(const std::vector<int>& indices, int n) {
  for (int j : indices) {
    if (j < 1 || j > n) {
      throw std::invalid_argument("component index " + std::to_string(j) + " outside [1, " + std::to_string(n) + "]");
    }
  }
}

struct RealisationSamples {
  std::vector<double> components;
  std::vector<std::vector<double>> variances;
};

inline RealisationSamples extract(const EigenDecomposition& eig, const SampleRequest& req) {
  const int n = eig.size();
  const double root_n = std::sqrt(static_cast<double>(n));
  RealisationSamples out;
  if (req.component_window) {
    const auto [first, last] = req.component_window->range(n);
    out.components.reserve(static_cast<std::size_t>(last - first) * req.component_indices.size());
    for (int alpha = first; alpha < last; ++alpha) {
      for (int j : req.component_indices) out.components.push_back(root_n * eig.component(j - 1, alpha));
    }
  }
  for (int m : req.variance_windows) {
    const auto [first, last] = SpectralWindow::centered(m).range(n);
    std::vector<double> values;
    values.reserve(req.variance_components.size());
    for (int i : req.variance_components) {
      double sum = 0.0;
      for (int alpha = first; alpha < last; ++alpha) {
        const double psi = eig.component(i - 1, alpha);
        sum += psi * psi;
      }
      values.push_back(n * sum / m);
    }
    out.variances.push_back(std::move(values));
  }
  return out;
}

}  // namespace detail

/// Run realisations 0..realisations-1 once and extract everything requested.
inline SampleBundle collect_samples(const EnsembleSpec& spec, int realisations, const SampleRequest& req,
                                    int threads = 1) {
  spec.validate();
  if (realisations < 1) throw std::invalid_argument("collect_samples: need at least one realisation");
  const int n = spec.n_dim;
  detail::check_components(req.component_indices, n);
  detail::check_components(req.variance_components, n);
  if (req.component_window) (void)req.component_window->range(n);
  for (int m : req.variance_windows) {
    if (m < 1 || m > n / 2) throw std::invalid_argument("M_I must lie in [1, N/2], got " + std::to_string(m));
  }

  auto per_realisation = parallel_map(static_cast<std::size_t>(realisations), threads, [&](std::size_t r) {
    try {
      return detail::extract(eigh(sample_matrix(spec, r)), req);
    } catch (const std::exception& e) {
      throw RealisationError(r, e.what());
    }
  });

  SampleBundle bundle;
  if (req.component_window) {
    ComponentSampleSet set;
    set.spec = spec;
    set.window = *req.component_window;
    set.component_indices = req.component_indices;
    set.realisations = realisations;
    for (auto& r : per_realisation) set.values.insert(set.values.end(), r.components.begin(), r.components.end());
    bundle.components = std::move(set);
  }
  for (std::size_t w = 0; w < req.variance_windows.size(); ++w) {
    VarianceSampleSet set;
    set.spec = spec;
    set.window = SpectralWindow::centered(req.variance_windows[w]);
    set.component_indices = req.variance_components;
    set.realisations = realisations;
    for (auto& r : per_realisation) set.values.insert(set.values.end(), r.variances[w].begin(), r.variances[w].end());
    bundle.variances.push_back(std::move(set));
  }
  return bundle;
}

inline ComponentSampleSet collect_components(const EnsembleSpec& spec, int realisations, const SpectralWindow& window,
                                             const std::vector<int>& component_indices, int threads = 1) {
  SampleRequest req;
  req.component_window = window;
  req.component_indices = component_indices;
  return std::move(*collect_samples(spec, realisations, req, threads).components);
}

inline VarianceSampleSet collect_local_variance(const EnsembleSpec& spec, int realisations, int m_window,
                                                const std::vector<int>& component_indices, int threads = 1) {
  SampleRequest req;
  req.variance_windows = {m_window};
  req.variance_components = component_indices;
  return std::move(collect_samples(spec, realisations, req, threads).variances.front());
}

inline VarianceSampleSet collect_local_variance(const EnsembleSpec& spec, int realisations, int m_window,
                                                int threads = 1) {
  return collect_local_variance(spec, realisations, m_window, default_variance_components(spec.n_dim), threads);
}

/// Histogram binning for rescaled components: width 0.05 on [-6, 6].
struct ComponentBinning {
  double bin_width = 0.05;
  double half_range = 6.0;
};

struct ScanEntry {
  int n_dim = 0;
  int realisations = 0;
  Histogram histogram;
};

struct ScanResult {
  std::vector<ScanEntry> entries;
  std::vector<double> consecutive_distances;  // sup |P_{k+1} - P_k|
};

/// Component histograms at several N with everything else fixed. The
/// component selector maps N to 1-based indices.
template <class Selector>
ScanResult n_independence_scan(const EnsembleSpec& base, const std::vector<int>& n_values,
                               const std::vector<int>& realisations, const SpectralWindow& window,
                               Selector&& components, const ComponentBinning& binning = {}, int threads = 1) {
  if (n_values.size() < 2) throw std::invalid_argument("n_independence_scan: need at least two values of N");
  if (realisations.size() != n_values.size()) {
    throw std::invalid_argument("n_independence_scan: one realisation count per N is required");
  }
  ScanResult result;
  for (std::size_t k = 0; k < n_values.size(); ++k) {
    EnsembleSpec spec = base;
    spec.n_dim = n_values[k];
    const auto set = collect_components(spec, realisations[k], window, components(spec.n_dim), threads);
    result.entries.push_back({spec.n_dim, realisations[k], build_histogram(set.values, binning.bin_width, binning.half_range)});
  }
  for (std::size_t k = 1; k < result.entries.size(); ++k) {
    result.consecutive_distances.push_back(sup_distance(result.entries[k - 1].histogram, result.entries[k].histogram));
  }
  return result;
}

struct PrefactorEstimate {
  double empirical = 0.0;
  double standard_error = 0.0;
  double analytic = std::numeric_limits<double>::quiet_NaN();  // GHD moment, if parameters were given
};

/// C_q = <x^{2q}> from samples. The standard error treats every realisation
/// as one independent block.
inline PrefactorEstimate fractal_prefactor(const ComponentSampleSet& set, double q,
                                           const std::optional<GhdParams>& fitted = std::nullopt) {
  if (!(q > 0.0)) throw std::invalid_argument("fractal_prefactor: q must be positive");
  if (set.values.empty() || set.realisations < 1) throw std::invalid_argument("fractal_prefactor: empty sample set");
  const std::size_t block = set.values.size() / static_cast<std::size_t>(set.realisations);
  std::vector<double> block_means;
  block_means.reserve(set.realisations);
  for (int r = 0; r < set.realisations; ++r) {
    double sum = 0.0;
    for (std::size_t k = 0; k < block; ++k) sum += std::pow(std::abs(set.values[r * block + k]), 2.0 * q);
    block_means.push_back(sum / block);
  }
  const Estimate e = estimate_mean(block_means);
  PrefactorEstimate out;
  out.empirical = e.mean;
  out.standard_error = e.standard_error;
  if (fitted) out.analytic = ghd_moment(q, *fitted);
  return out;
}

}  // namespace rmtlab
