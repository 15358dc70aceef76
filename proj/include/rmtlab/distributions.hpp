#pragma once

// Densities and moments for the symmetric generalised hyperbolic
// distribution (GHD), its generalised inverse Gaussian (GIG) mixing law, the
// Porter-Thomas law and the unit-mean chi-squared family. Every density is
// assembled in log space and exponentiated last.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "rmtlab/quadrature.hpp"
#include "rmtlab/special_functions.hpp"

namespace rmtlab {

/// Symmetric GHD parameters (lambda, alpha, delta) with xi = alpha * delta.
class GhdParams {
 public:
  GhdParams(double lambda, double alpha, double delta)
      : lambda_(lambda), alpha_(alpha), delta_(delta), xi_(alpha * delta) {
    if (!(alpha > 0.0) || !(delta > 0.0) || !std::isfinite(alpha) || !std::isfinite(delta) ||
        !std::isfinite(lambda)) {
      throw std::domain_error("GhdParams: alpha and delta must be positive and finite");
    }
  }

  [[nodiscard]] double lambda() const { return lambda_; }
  [[nodiscard]] double alpha() const { return alpha_; }
  [[nodiscard]] double delta() const { return delta_; }
  [[nodiscard]] double xi() const { return xi_; }

 private:
  double lambda_;
  double alpha_;
  double delta_;
  double xi_;
};

struct Chi2Params {
  double nu;

  explicit Chi2Params(double degrees) : nu(degrees) {
    if (!(degrees > 0.0) || !std::isfinite(degrees)) {
      throw std::domain_error("Chi2Params: nu must be positive");
    }
  }
};

namespace detail {
inline constexpr double kLogTwoPi = 1.8378770664093454836;  // ln(2 pi)
inline constexpr double kLogPi = 1.1447298858494001741;     // ln(pi)
inline constexpr double kLog2 = std::numbers::ln2;
}  // namespace detail

/// GHD density with the normalisation precomputed; cheap to call repeatedly.
class GhdDensity {
 public:
  explicit GhdDensity(const GhdParams& params) : params_(params) {
    log_norm_ = 0.5 * std::log(params.alpha()) - 0.5 * detail::kLogTwoPi -
                params.lambda() * std::log(params.delta()) -
                log_bessel_k(params.lambda(), params.xi()).log_magnitude;
  }

  [[nodiscard]] double log_pdf(double x) const {
    const double r2 = x * x + params_.delta() * params_.delta();
    const double r = std::sqrt(r2);
    const double order = params_.lambda() - 0.5;
    return log_norm_ + 0.5 * order * std::log(r2) +
           log_bessel_k(order, params_.alpha() * r).log_magnitude;
  }

  double operator()(double x) const { return std::exp(log_pdf(x)); }

  [[nodiscard]] const GhdParams& params() const { return params_; }

 private:
  GhdParams params_;
  double log_norm_ = 0.0;
};

inline double ghd_pdf(double x, const GhdParams& params) { return GhdDensity(params)(x); }

inline double log_gig_pdf(double y, const GhdParams& p) {
  if (!(y > 0.0)) {
    throw std::domain_error("gig_pdf: argument must be positive, got " + std::to_string(y));
  }
  const double a = p.alpha();
  const double d = p.delta();
  return p.lambda() * std::log(a / d) - detail::kLog2 - log_bessel_k(p.lambda(), p.xi()).log_magnitude +
         (p.lambda() - 1.0) * std::log(y) - 0.5 * (a * a * y + d * d / y);
}

inline double gig_pdf(double y, const GhdParams& p) { return std::exp(log_gig_pdf(y, p)); }

/// GHD density through its normal variance-mixture representation,
/// integrating the GIG mixing density numerically. Cross-check only.
inline double mixture_pdf(double x, const GhdParams& p, int quadrature_budget = 2000) {
  const double a2 = p.alpha() * p.alpha();
  const double c = p.delta() * p.delta() + x * x;
  const double shape = p.lambda() - 0.5;
  const double log_gig_norm = p.lambda() * std::log(p.alpha() / p.delta()) - detail::kLog2 -
                              log_bessel_k(p.lambda(), p.xi()).log_magnitude;
  // Integrate over u = ln y; the log integrand is concave in u.
  auto log_integrand = [&](double u) {
    const double y = std::exp(u);
    return log_gig_norm + shape * u - 0.5 * (a2 * y + c / y) - 0.5 * detail::kLogTwoPi;
  };
  const double mode_y = (shape + std::sqrt(shape * shape + a2 * c)) / a2;
  const double mode = std::log(mode_y);
  const double peak = log_integrand(mode);
  const double width = 1.0 / std::sqrt(0.5 * a2 * mode_y + 0.5 * c / mode_y);
  constexpr double kDrop = 60.0;
  double lo = mode;
  while (log_integrand(lo) > peak - kDrop) lo -= width;
  double hi = mode;
  while (log_integrand(hi) > peak - kDrop) hi += width;

  QuadratureOptions opts;
  opts.abs_tol = 0.0;
  opts.rel_tol = 1e-13;
  opts.max_intervals = quadrature_budget;
  auto scaled = [&](double u) { return std::exp(log_integrand(u) - peak); };
  const auto res = integrate(scaled, lo, hi, opts);
  if (!res.converged && res.error > 1e-10 * std::abs(res.value)) {
    throw std::runtime_error("mixture_pdf: quadrature did not converge within budget");
  }
  return res.value * std::exp(peak);
}

/// log C_GOE(q) = log(2^q Gamma(q + 1/2) / sqrt(pi)).
inline double log_goe_moment(double q) {
  return q * detail::kLog2 + log_gamma(q + 0.5) - 0.5 * detail::kLogPi;
}

/// C_q = <x^{2q}> under the GHD.
inline double ghd_moment(double q, const GhdParams& p) {
  if (!(q >= 0.0)) throw std::domain_error("ghd_moment: q must be nonnegative");
  if (q == 0.0) return 1.0;
  const double log_gig = q * std::log(p.delta() / p.alpha()) +
                         log_bessel_k(p.lambda() + q, p.xi()).log_magnitude -
                         log_bessel_k(p.lambda(), p.xi()).log_magnitude;
  return std::exp(log_goe_moment(q) + log_gig);
}

/// <y^q> under the GIG mixing law.
inline double gig_moment(double q, const GhdParams& p) {
  return std::exp(q * std::log(p.delta() / p.alpha()) +
                  log_bessel_k(p.lambda() + q, p.xi()).log_magnitude -
                  log_bessel_k(p.lambda(), p.xi()).log_magnitude);
}

/// Parameters (lambda, alpha, delta) with alpha * delta = xi and unit
/// second moment.
inline GhdParams constrain_unit_variance(double lambda, double xi) {
  if (!(xi > 0.0) || !std::isfinite(xi)) {
    throw std::domain_error("constrain_unit_variance: xi must be positive");
  }
  const auto pair = log_bessel_k_pair(lambda, xi);
  const double alpha = std::sqrt(xi * std::exp(pair.log_k_next - pair.log_k));
  return GhdParams(lambda, alpha, xi / alpha);
}

inline double ptd_pdf(double x) {
  return std::exp(-0.5 * x * x - 0.5 * detail::kLogTwoPi);
}

inline double ptd_pdf_squared(double x) {
  if (!(x > 0.0)) throw std::domain_error("ptd_pdf_squared: argument must be positive");
  return std::exp(-0.5 * x - 0.5 * (detail::kLogTwoPi + std::log(x)));
}

/// Unit-mean chi-squared density with nu degrees of freedom.
inline double chi2_pdf(double x, const Chi2Params& p) {
  if (!(x > 0.0)) throw std::domain_error("chi2_pdf: argument must be positive");
  const double h = 0.5 * p.nu;
  return std::exp(h * std::log(p.nu) + (h - 1.0) * std::log(x) - h * detail::kLog2 - log_gamma(h) -
                  h * x);
}

/// Density of Psi^2 when Psi is GHD distributed.
inline double ghd_psi_squared_pdf(double x, const GhdDensity& density) {
  if (!(x > 0.0)) throw std::domain_error("ghd_psi_squared_pdf: argument must be positive");
  const double root = std::sqrt(x);
  return std::exp(density.log_pdf(root) - std::log(root));
}

inline double ghd_psi_squared_pdf(double x, const GhdParams& params) {
  return ghd_psi_squared_pdf(x, GhdDensity(params));
}

/// Large-window Gaussian limit of the local eigenvector variance density.
inline double goe_local_variance_pdf(double x, int m_window) {
  if (m_window < 1) throw std::domain_error("goe_local_variance_pdf: M_I must be >= 1");
  const double m = m_window;
  return std::sqrt(m / (4.0 * std::numbers::pi)) * std::exp(-m * (x - 1.0) * (x - 1.0) / 4.0);
}

}  // namespace rmtlab
