#pragma once

// Test-only helpers: quadrature oracles built on Boost.Math (independent of
// the library's own integrator) and a GHD sampler built from the GIG
// variance mixture.

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rmtlab/distributions.hpp"
#include "rmtlab/random.hpp"

namespace rmtlab::testing {

/// Integral over [a, b] (either bound may be infinite).
template <class F>
double oracle_integral(F f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 30, 1e-14);
}

/// Integral over (0, inf) with an integrable singularity allowed at 0.
template <class F>
double oracle_integral_positive(F f) {
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-13);
}

/// Integral over (a, b) with integrable endpoint singularities.
template <class F>
double oracle_integral_singular(F f, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(f, a, b, 1e-13);
}

/// Draws GHD variates as sqrt(Y) * Z with Y from the GIG mixing law, using a
/// tabulated inverse CDF of ln Y.
class GhdSampler {
 public:
  explicit GhdSampler(const GhdParams& params, int grid = 40000) {
    const double a2 = params.alpha() * params.alpha();
    const double d2 = params.delta() * params.delta();
    const double shape = params.lambda();
    // density of u = ln y is proportional to exp(shape u - (a2 e^u + d2 e^-u)/2)
    auto log_density = [&](double u) { return shape * u - 0.5 * (a2 * std::exp(u) + d2 * std::exp(-u)); };
    const double mode = std::log((shape + std::sqrt(shape * shape + a2 * d2)) / a2);
    const double peak = log_density(mode);
    double lo = mode;
    while (log_density(lo) > peak - 45.0) lo -= 0.05;
    double hi = mode;
    while (log_density(hi) > peak - 45.0) hi += 0.05;
    u_.resize(grid);
    cdf_.resize(grid);
    const double step = (hi - lo) / (grid - 1);
    double prev = std::exp(log_density(lo) - peak);
    double acc = 0.0;
    for (int k = 0; k < grid; ++k) {
      u_[k] = lo + k * step;
      const double cur = std::exp(log_density(u_[k]) - peak);
      if (k > 0) acc += 0.5 * (prev + cur) * step;
      cdf_[k] = acc;
      prev = cur;
    }
    for (double& c : cdf_) c /= acc;
  }

  double sample_mixing(CounterRng& rng) const {
    const double p = rng.uniform();
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), p);
    const auto k = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - cdf_.begin(), 1, cdf_.size() - 1));
    const double t = (p - cdf_[k - 1]) / (cdf_[k] - cdf_[k - 1]);
    return std::exp(u_[k - 1] + t * (u_[k] - u_[k - 1]));
  }

  double operator()(CounterRng& rng) const {
    const double y = sample_mixing(rng);
    return std::sqrt(y) * rng.normal();
  }

 private:
  std::vector<double> u_;
  std::vector<double> cdf_;
};

}  // namespace rmtlab::testing
