#pragma once

// Modified Bessel function of the second kind for real order and log-Gamma.
//
// K_nu(x) is evaluated with Temme's method: the pair (K_mu, K_mu+1) for
// |mu| <= 1/2 comes from the Temme power series when x <= 2 and from Steed's
// continued fraction otherwise, then the upward recurrence (stable for K)
// carries it to the requested order. The log-scaled entry points run the
// recurrence on ratios so that nothing overflows for |nu| <= 500 and
// x >= 1e-8.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rmtlab {

/// Value represented as sign * exp(log_magnitude).
struct LogScaledValue {
  double log_magnitude = -std::numeric_limits<double>::infinity();
  int sign = 0;

  [[nodiscard]] double value() const {
    return sign == 0 ? 0.0 : sign * std::exp(log_magnitude);
  }
};

inline constexpr double kMaxBesselOrder = 500.0;

namespace detail {

// Taylor coefficients of 1/Gamma(z) = sum_{k>=1} c_k z^k.
inline constexpr std::array<double, 26> kRecipGammaTaylor = {
    1.0,
    0.57721566490153286,
    -0.65587807152025388,
    -0.042002635034095236,
    0.16653861138229149,
    -0.042197734555544337,
    -0.0096219715278769736,
    0.0072189432466630995,
    -0.0011651675918590651,
    -0.00021524167411495097,
    0.00012805028238811619,
    -2.0134854780788239e-5,
    -1.2504934821426707e-6,
    1.1330272319816959e-6,
    -2.0563384169776071e-7,
    6.1160951044814158e-9,
    5.0020076444692229e-9,
    -1.1812745704870201e-9,
    1.0434267116911005e-10,
    7.7822634399050713e-12,
    -3.6968056186422057e-12,
    5.100370287454476e-13,
    -2.0583260535665068e-14,
    -5.348122539423018e-15,
    1.2267786282382608e-15,
    -1.1812593016974588e-16,
};

// Temme's auxiliary gamma quantities for |mu| <= 1/2:
//   gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu)
//   gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2
// along with gampl = 1/Gamma(1+mu) and gammi = 1/Gamma(1-mu).
struct TemmeGammas {
  double gam1;
  double gam2;
  double gampl;
  double gammi;
};

inline TemmeGammas temme_gammas(double mu) {
  // 1/Gamma(1+mu) = sum_k c_k mu^(k-1); split into even and odd powers.
  double even = 0.0;  // c1 + c3 mu^2 + c5 mu^4 + ...
  double odd = 0.0;   // c2 + c4 mu^2 + c6 mu^4 + ...
  const double mu2 = mu * mu;
  for (std::size_t k = kRecipGammaTaylor.size(); k-- > 0;) {
    // index k holds c_{k+1}
    if (k % 2 == 0) {
      even = even * mu2 + kRecipGammaTaylor[k];
    } else {
      odd = odd * mu2 + kRecipGammaTaylor[k];
    }
  }
  TemmeGammas g{};
  g.gam1 = -odd;
  g.gam2 = even;
  g.gampl = even + mu * odd;
  g.gammi = even - mu * odd;
  return g;
}

inline constexpr int kMaxBesselIterations = 100000;
inline constexpr double kBesselEps = 1e-16;

// K_mu(x) and K_mu+1(x) for |mu| <= 1/2, returned as log K_mu and the ratio
// K_mu+1 / K_mu.
struct BaseBesselPair {
  double log_k_mu;
  double ratio;
};

inline BaseBesselPair bessel_k_base(double mu, double x) {
  constexpr double pi = std::numbers::pi;
  if (x <= 2.0) {
    const double x2 = 0.5 * x;
    const double pimu = pi * mu;
    const double fact = std::abs(pimu) < kBesselEps ? 1.0 : pimu / std::sin(pimu);
    double d = -std::log(x2);
    double e = mu * d;
    const double fact2 = std::abs(e) < kBesselEps ? 1.0 : std::sinh(e) / e;
    const TemmeGammas g = temme_gammas(mu);
    double ff = fact * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / g.gampl;
    double q = 0.5 / (e * g.gammi);
    double c = 1.0;
    d = x2 * x2;
    double sum1 = p;
    const double mu2 = mu * mu;
    int i = 1;
    for (; i <= kMaxBesselIterations; ++i) {
      const double di = i;
      ff = (di * ff + p + q) / (di * di - mu2);
      c *= d / di;
      p /= di - mu;
      q /= di + mu;
      const double del = c * ff;
      sum += del;
      const double del1 = c * (p - di * ff);
      sum1 += del1;
      if (std::abs(del) < std::abs(sum) * kBesselEps) break;
    }
    if (i > kMaxBesselIterations) {
      throw std::runtime_error("bessel_k: series failed to converge");
    }
    return {std::log(sum), sum1 * (2.0 / x) / sum};
  }

  // Steed's continued fraction (CF2) with Temme's normalisation sum.
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d;
  double delh = d;
  double q1 = 0.0;
  double q2 = 1.0;
  const double a1 = 0.25 - mu * mu;
  double q = a1;
  double c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  int i = 2;
  for (; i <= kMaxBesselIterations; ++i) {
    a -= 2.0 * (i - 1);
    c = -a * c / i;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < kBesselEps) break;
  }
  if (i > kMaxBesselIterations) {
    throw std::runtime_error("bessel_k: continued fraction failed to converge");
  }
  h *= a1;
  const double log_k_mu = 0.5 * std::log(pi / (2.0 * x)) - x - std::log(s);
  return {log_k_mu, (mu + x + 0.5 - h) / x};
}

inline void check_bessel_args(double order, double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("bessel_k: argument must be positive, got " + std::to_string(x));
  }
  if (!(std::abs(order) <= kMaxBesselOrder)) {
    throw std::out_of_range("bessel_k: |order| must not exceed 500, got " + std::to_string(order));
  }
}


// Upward recurrence to nonnegative order nu. Besides log K_nu it keeps the
// ratios to the neighbouring orders; the downward ratio K_{nu-1}/K_nu is only
// available when at least one recurrence step was taken.
struct BesselRecurrence {
  double log_k;
  double ratio_up;    // K_{nu+1} / K_nu
  double ratio_down;  // K_{nu-1} / K_nu, NaN when nu < 1/2
};

inline BesselRecurrence bessel_k_recurrence(double nu, double x) {
  const int nl = static_cast<int>(std::floor(nu + 0.5));
  const double mu = nu - nl;
  const auto base = bessel_k_base(mu, x);
  double log_k = base.log_k_mu;
  double ratio = base.ratio;
  double ratio_down = std::numeric_limits<double>::quiet_NaN();
  const double two_over_x = 2.0 / x;
  for (int i = 0; i < nl; ++i) {
    log_k += std::log(ratio);
    ratio_down = 1.0 / ratio;
    ratio = (mu + i + 1) * two_over_x + ratio_down;
  }
  return {log_k, ratio, ratio_down};
}

}  // namespace detail

/// log K_nu(x) together with log K_{nu+1}(x).
struct LogBesselPair {
  double log_k;
  double log_k_next;
};

/// Log-scaled K_nu(x) and K_{nu+1}(x) for real nu with |nu|, |nu+1| <= 500.
inline LogBesselPair log_bessel_k_pair(double order, double x) {
  detail::check_bessel_args(order, x);
  detail::check_bessel_args(order + 1.0, x);
  if (order >= 0.0) {
    const auto r = detail::bessel_k_recurrence(order, x);
    return {r.log_k, r.log_k + std::log(r.ratio_up)};
  }
  // K_{nu+1} = K_{|nu|-1} for negative nu.
  const auto r = detail::bessel_k_recurrence(-order, x);
  if (!std::isnan(r.ratio_down)) {
    return {r.log_k, r.log_k + std::log(r.ratio_down)};
  }
  const auto next = detail::bessel_k_recurrence(std::abs(order + 1.0), x);
  return {r.log_k, next.log_k};
}

/// Log-scaled K_nu(x); the sign is always +1 for x > 0.
inline LogScaledValue log_bessel_k(double order, double x) {
  detail::check_bessel_args(order, x);
  return {detail::bessel_k_recurrence(std::abs(order), x).log_k, 1};
}

/// K_nu(x) evaluated directly by forward recurrence on values. Returns +inf
/// when the result exceeds the double range and 0 when it underflows; use
/// log_bessel_k for extreme arguments.
inline double bessel_k(double order, double x) {
  detail::check_bessel_args(order, x);
  const double nu = std::abs(order);
  const int nl = static_cast<int>(std::floor(nu + 0.5));
  const double mu = nu - nl;
  const auto base = detail::bessel_k_base(mu, x);
  double k_mu = std::exp(base.log_k_mu);
  if (k_mu == 0.0) return 0.0;
  double k_next = k_mu * base.ratio;
  const double two_over_x = 2.0 / x;
  for (int i = 0; i < nl; ++i) {
    const double k_new = (mu + i + 1) * two_over_x * k_next + k_mu;
    k_mu = k_next;
    k_next = k_new;
    if (std::isinf(k_mu)) return k_mu;
  }
  return k_mu;
}

/// ln Gamma(x) for x > 0 (Lanczos, g = 7, with reflection below 1/2).
inline double log_gamma(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("log_gamma: argument must be positive, got " + std::to_string(x));
  }
  static constexpr std::array<double, 9> kLanczos = {
      0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  constexpr double pi = std::numbers::pi;
  if (x < 0.5) {
    return std::log(pi / std::sin(pi * x)) - log_gamma(1.0 - x);
  }
  // Gamma(x) = Gamma(z + 1) with z = x - 1.
  const double z = x - 1.0;
  double series = kLanczos[0];
  for (std::size_t i = 1; i < kLanczos.size(); ++i) {
    series += kLanczos[i] / (z + static_cast<double>(i));
  }
  const double t = z + 7.5;
  return 0.5 * std::log(2.0 * pi) + (z + 0.5) * std::log(t) - t + std::log(series);
}

}  // namespace rmtlab
