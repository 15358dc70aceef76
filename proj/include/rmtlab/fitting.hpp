#pragma once

// Least-squares fits of the unit-variance GHD to density estimates, and of
// the unit-mean chi-squared law to the GHD of Psi^2.

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmtlab/distributions.hpp"
#include "rmtlab/histogram.hpp"
#include "rmtlab/minimize.hpp"

namespace rmtlab {

/// Bin centres and density values; all a fit needs from a histogram.
struct DensityTable {
  std::vector<double> centers;
  std::vector<double> densities;

  static DensityTable from(const Histogram& h) { return {h.bin_centers(), h.density}; }
};

struct FitResult {
  double lambda = 0.0;
  double xi = 0.0;
  double alpha = 0.0;
  double delta = 0.0;
  double objective = 0.0;  // sum of squared density residuals over included bins
  int iterations = 0;
  bool converged = false;
  int bins_used = 0;
  double density_floor = 0.0;

  [[nodiscard]] GhdParams params() const { return GhdParams(lambda, alpha, delta); }
  [[nodiscard]] double residual_rms() const {
    return bins_used > 0 ? std::sqrt(objective / bins_used) : 0.0;
  }
};

inline constexpr double kDefaultDensityFloor = 0.01;
inline constexpr int kMinFitBins = 10;

struct GhdFitOptions {
  double density_floor = kDefaultDensityFloor;
  // (lambda, xi) starting points; the best final objective wins.
  std::vector<std::array<double, 2>> starts = {{0.0, 0.5}, {2.0, 1.0}, {-0.3, 0.1}};
  double max_abs_lambda = 300.0;
  double min_log_xi = -12.0;
  double max_log_xi = 6.0;
  MinimizeOptions minimizer{};
};

/// Sum of squared residuals of the constrained GHD at (lambda, ln xi) over
/// the given points; +inf outside the search box.
class GhdObjective {
 public:
  GhdObjective(std::vector<double> centers, std::vector<double> densities, const GhdFitOptions& opts)
      : centers_(std::move(centers)), densities_(std::move(densities)), opts_(opts) {}

  double operator()(const Point<2>& p) const {
    const double lambda = p[0];
    const double log_xi = p[1];
    if (!(std::abs(lambda) <= opts_.max_abs_lambda) || !(log_xi >= opts_.min_log_xi) ||
        !(log_xi <= opts_.max_log_xi)) {
      return std::numeric_limits<double>::infinity();
    }
    const GhdDensity pdf(constrain_unit_variance(lambda, std::exp(log_xi)));
    double sum = 0.0;
    for (std::size_t k = 0; k < centers_.size(); ++k) {
      const double r = pdf(centers_[k]) - densities_[k];
      sum += r * r;
    }
    return sum;
  }

  [[nodiscard]] std::size_t points() const { return centers_.size(); }

 private:
  std::vector<double> centers_;
  std::vector<double> densities_;
  GhdFitOptions opts_;
};

/// Two-parameter (lambda, xi) least-squares fit of the unit-variance GHD to
/// the bins whose density reaches the floor.
inline FitResult fit_ghd(const DensityTable& table, const GhdFitOptions& opts = {}) {
  if (table.centers.size() != table.densities.size()) {
    throw std::invalid_argument("fit_ghd: centre and density columns differ in length");
  }
  std::vector<double> centers;
  std::vector<double> densities;
  for (std::size_t k = 0; k < table.centers.size(); ++k) {
    if (table.densities[k] >= opts.density_floor) {
      centers.push_back(table.centers[k]);
      densities.push_back(table.densities[k]);
    }
  }
  if (static_cast<int>(centers.size()) < kMinFitBins) {
    throw std::invalid_argument("fit_ghd: only " + std::to_string(centers.size()) +
                                " bins reach the density floor, need at least " + std::to_string(kMinFitBins));
  }
  if (opts.starts.empty()) throw std::invalid_argument("fit_ghd: no starting points");
  const GhdObjective objective(std::move(centers), std::move(densities), opts);
  const Point<2> scale = {0.5, 0.5};

  MinimizeResult<2> best;
  best.value = std::numeric_limits<double>::infinity();
  int total_iterations = 0;
  for (const auto& s : opts.starts) {
    const Point<2> start = {s[0], std::log(s[1])};
    auto r = nelder_mead<2>(objective, start, scale, opts.minimizer);
    // A restart from the reported minimum guards against a collapsed simplex.
    auto polished = nelder_mead<2>(objective, r.argmin, scale, opts.minimizer);
    total_iterations += r.iterations + polished.iterations;
    if (polished.value <= r.value) {
      polished.iterations += r.iterations;
      r = polished;
    }
    if (r.value < best.value || (r.value == best.value && r.converged && !best.converged)) best = r;
  }

  FitResult fit;
  fit.lambda = best.argmin[0];
  fit.xi = std::exp(best.argmin[1]);
  const GhdParams p = constrain_unit_variance(fit.lambda, fit.xi);
  fit.alpha = p.alpha();
  fit.delta = p.delta();
  fit.objective = best.value;
  fit.iterations = total_iterations;
  fit.converged = best.converged;
  fit.bins_used = static_cast<int>(objective.points());
  fit.density_floor = opts.density_floor;
  return fit;
}

inline FitResult fit_ghd(const Histogram& h, const GhdFitOptions& opts = {}) {
  return fit_ghd(DensityTable::from(h), opts);
}

inline FitResult fit_ghd(const Histogram& h, double density_floor) {
  GhdFitOptions opts;
  opts.density_floor = density_floor;
  return fit_ghd(DensityTable::from(h), opts);
}

struct Chi2Fit {
  double nu = 0.0;
  double residual = 0.0;  // discretised integral of the squared difference
  int iterations = 0;
  bool converged = false;
};

inline constexpr double kChi2FitLower = 0.04;
inline constexpr double kChi2FitUpper = 4.0;
inline constexpr int kChi2FitGridPoints = 200;

/// Uniform abscissae on [0.04, 4] used by the chi-squared fits.
inline std::vector<double> chi2_fit_grid() {
  std::vector<double> xs(kChi2FitGridPoints);
  const double step = (kChi2FitUpper - kChi2FitLower) / (kChi2FitGridPoints - 1);
  for (int k = 0; k < kChi2FitGridPoints; ++k) xs[k] = kChi2FitLower + k * step;
  return xs;
}

/// Best unit-mean chi-squared approximation to an arbitrary target density
/// on the fit grid, minimising over ln(nu).
inline Chi2Fit fit_chi2_to_density(const std::function<double(double)>& target) {
  const auto xs = chi2_fit_grid();
  const double step = xs[1] - xs[0];
  std::vector<double> values(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) values[k] = target(xs[k]);
  auto objective = [&](const Point<1>& p) {
    if (!(std::abs(p[0]) <= 8.0)) return std::numeric_limits<double>::infinity();
    const Chi2Params chi(std::exp(p[0]));
    double sum = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const double r = chi2_pdf(xs[k], chi) - values[k];
      sum += r * r;
    }
    return sum * step;
  };
  auto r = nelder_mead<1>(objective, Point<1>{0.0}, Point<1>{0.5});
  auto polished = nelder_mead<1>(objective, r.argmin, Point<1>{0.1});
  Chi2Fit fit;
  fit.nu = std::exp(polished.argmin[0]);
  fit.residual = polished.value;
  fit.iterations = r.iterations + polished.iterations;
  fit.converged = polished.converged;
  return fit;
}

/// chi-squared fit to the Psi^2 density of the unit-variance GHD(lambda, xi).
inline Chi2Fit fit_chi2_to_ghd(double lambda, double xi) {
  const GhdDensity ghd(constrain_unit_variance(lambda, xi));
  return fit_chi2_to_density([&](double x) { return ghd_psi_squared_pdf(x, ghd); });
}

}  // namespace rmtlab
