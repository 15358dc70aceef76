#pragma once

// Equal-width normalised histograms and distances between density estimates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace rmtlab {

struct Histogram {
  std::vector<double> bin_edges;
  std::vector<std::int64_t> counts;
  std::vector<double> density;   // counts / (binned count * bin width)
  std::int64_t sample_count = 0;  // all samples offered, including excluded ones
  std::int64_t excluded = 0;      // samples outside [lo, hi]

  [[nodiscard]] std::size_t bins() const { return counts.size(); }
  [[nodiscard]] double bin_width(std::size_t k) const { return bin_edges[k + 1] - bin_edges[k]; }
  [[nodiscard]] double bin_center(std::size_t k) const {
    return 0.5 * (bin_edges[k] + bin_edges[k + 1]);
  }
  [[nodiscard]] double excluded_fraction() const {
    return sample_count == 0 ? 0.0 : static_cast<double>(excluded) / sample_count;
  }
  [[nodiscard]] std::vector<double> bin_centers() const {
    std::vector<double> c(bins());
    for (std::size_t k = 0; k < bins(); ++k) c[k] = bin_center(k);
    return c;
  }
};

/// Equal-width bins covering [lo, hi]; bin_width must divide hi - lo.
/// Samples outside the range are tallied in `excluded` and left out of the
/// normalisation, so the densities integrate to one over the range.
inline Histogram build_histogram(std::span<const double> samples, double bin_width, double lo, double hi) {
  if (samples.empty()) throw std::invalid_argument("build_histogram: no samples");
  if (!(bin_width > 0.0) || !(hi > lo)) throw std::invalid_argument("build_histogram: bad binning");
  const double span = hi - lo;
  const double ratio = span / bin_width;
  const auto nbins = static_cast<std::size_t>(std::llround(ratio));
  if (nbins == 0 || std::abs(ratio - static_cast<double>(nbins)) > 1e-9 * ratio) {
    throw std::invalid_argument("build_histogram: bin width does not divide the range");
  }
  Histogram h;
  h.bin_edges.resize(nbins + 1);
  for (std::size_t k = 0; k <= nbins; ++k) h.bin_edges[k] = lo + span * (static_cast<double>(k) / nbins);
  h.bin_edges.back() = hi;
  h.counts.assign(nbins, 0);
  h.sample_count = static_cast<std::int64_t>(samples.size());
  for (double x : samples) {
    if (!(x >= lo && x <= hi)) {
      ++h.excluded;
      continue;
    }
    auto k = static_cast<std::size_t>((x - lo) / span * static_cast<double>(nbins));
    k = std::min(k, nbins - 1);
    // Guard against rounding at interior edges.
    if (x < h.bin_edges[k] && k > 0) --k;
    else if (x >= h.bin_edges[k + 1] && k + 1 < nbins) ++k;
    ++h.counts[k];
  }
  const std::int64_t binned = h.sample_count - h.excluded;
  if (binned == 0) throw std::invalid_argument("build_histogram: every sample lies outside the range");
  h.density.resize(nbins);
  for (std::size_t k = 0; k < nbins; ++k) {
    h.density[k] = static_cast<double>(h.counts[k]) / (static_cast<double>(binned) * h.bin_width(k));
  }
  return h;
}

/// Symmetric range [-half_range, half_range].
inline Histogram build_histogram(std::span<const double> samples, double bin_width, double half_range) {
  if (!(half_range > 0.0)) throw std::invalid_argument("build_histogram: range must be positive");
  return build_histogram(samples, bin_width, -half_range, half_range);
}

/// Mean of pdf over each bin (Simpson's rule), the quantity a histogram
/// estimates.
template <class Pdf>
std::vector<double> bin_averaged(const Histogram& h, Pdf&& pdf) {
  std::vector<double> out(h.bins());
  for (std::size_t k = 0; k < h.bins(); ++k) {
    const double a = h.bin_edges[k];
    const double b = h.bin_edges[k + 1];
    const double m = 0.5 * (a + b);
    out[k] = (pdf(a) + 4.0 * pdf(m) + pdf(b)) / 6.0;
  }
  return out;
}

/// max_k |density_k - mean of pdf over bin k|.
template <class Pdf>
double sup_distance_to(const Histogram& h, Pdf&& pdf) {
  const auto reference = bin_averaged(h, pdf);
  double worst = 0.0;
  for (std::size_t k = 0; k < h.bins(); ++k) worst = std::max(worst, std::abs(h.density[k] - reference[k]));
  return worst;
}

/// Same, restricted to bins whose centres lie in [lo, hi].
template <class Pdf>
double sup_distance_to(const Histogram& h, Pdf&& pdf, double lo, double hi) {
  const auto reference = bin_averaged(h, pdf);
  double worst = 0.0;
  for (std::size_t k = 0; k < h.bins(); ++k) {
    const double c = h.bin_center(k);
    if (c < lo || c > hi) continue;
    worst = std::max(worst, std::abs(h.density[k] - reference[k]));
  }
  return worst;
}

/// Sup-norm distance between two histograms on identical bins.
inline double sup_distance(const Histogram& a, const Histogram& b) {
  if (a.bin_edges != b.bin_edges) throw std::invalid_argument("sup_distance: histograms use different bins");
  double worst = 0.0;
  for (std::size_t k = 0; k < a.bins(); ++k) worst = std::max(worst, std::abs(a.density[k] - b.density[k]));
  return worst;
}

}  // namespace rmtlab
