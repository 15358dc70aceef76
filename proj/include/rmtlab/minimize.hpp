#pragma once

// Nelder-Mead simplex minimiser for small fixed dimensions.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

namespace rmtlab {

template <std::size_t Dim>
using Point = std::array<double, Dim>;

template <std::size_t Dim>
struct MinimizeResult {
  Point<Dim> argmin{};
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct MinimizeOptions {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  double tolerance = 1e-6;  // simplex diameter, in units of the per-axis scale
  int max_iterations = 2000;
};

class NonFiniteObjective : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <std::size_t Dim>
std::string format_point(const Point<Dim>& p) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < Dim; ++i) os << (i ? ", " : "") << p[i];
  os << ')';
  return os.str();
}

}  // namespace detail

/// Minimise f starting from `start` with initial simplex steps `scale`.
/// Stops when every vertex lies within tolerance * scale of the best one
/// along each axis, or after max_iterations. +inf marks infeasible points;
/// NaN aborts with NonFiniteObjective.
template <std::size_t Dim, class F>
MinimizeResult<Dim> nelder_mead(F&& f, const Point<Dim>& start, const Point<Dim>& scale,
                                const MinimizeOptions& opts = {}) {
  constexpr std::size_t kVertices = Dim + 1;
  std::array<Point<Dim>, kVertices> x{};
  std::array<double, kVertices> fx{};

  auto eval = [&](const Point<Dim>& p) {
    const double v = f(p);
    if (std::isnan(v)) throw NonFiniteObjective("nelder_mead: objective is NaN at " + detail::format_point(p));
    return v;
  };

  x[0] = start;
  fx[0] = eval(start);
  if (!std::isfinite(fx[0])) {
    throw NonFiniteObjective("nelder_mead: objective not finite at start " + detail::format_point(start));
  }
  for (std::size_t i = 0; i < Dim; ++i) {
    x[i + 1] = start;
    x[i + 1][i] += scale[i];
    fx[i + 1] = eval(x[i + 1]);
  }

  std::array<std::size_t, kVertices> order{};
  MinimizeResult<Dim> result;
  int iter = 0;
  for (;; ++iter) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[Dim - 1];

    double diameter = 0.0;
    for (std::size_t v = 0; v < kVertices; ++v) {
      for (std::size_t i = 0; i < Dim; ++i) {
        diameter = std::max(diameter, std::abs(x[v][i] - x[best][i]) / std::abs(scale[i]));
      }
    }
    if (diameter < opts.tolerance) {
      result.converged = true;
      break;
    }
    if (iter >= opts.max_iterations) break;

    Point<Dim> centroid{};
    for (std::size_t v = 0; v < kVertices; ++v) {
      if (v == worst) continue;
      for (std::size_t i = 0; i < Dim; ++i) centroid[i] += x[v][i] / Dim;
    }
    auto along = [&](double t) {
      Point<Dim> p;
      for (std::size_t i = 0; i < Dim; ++i) p[i] = centroid[i] + t * (x[worst][i] - centroid[i]);
      return p;
    };

    const Point<Dim> xr = along(-opts.reflection);
    const double fr = eval(xr);
    if (fr < fx[best]) {
      const Point<Dim> xe = along(-opts.reflection * opts.expansion);
      const double fe = eval(xe);
      if (fe < fr) {
        x[worst] = xe;
        fx[worst] = fe;
      } else {
        x[worst] = xr;
        fx[worst] = fr;
      }
      continue;
    }
    if (fr < fx[second_worst]) {
      x[worst] = xr;
      fx[worst] = fr;
      continue;
    }
    // Outside contraction when the reflected point beats the worst vertex,
    // inside contraction otherwise.
    const bool outside = fr < fx[worst];
    const Point<Dim> xc = outside ? along(-opts.reflection * opts.contraction) : along(opts.contraction);
    const double fc = eval(xc);
    if (fc < (outside ? fr : fx[worst])) {
      x[worst] = xc;
      fx[worst] = fc;
      continue;
    }
    for (std::size_t v = 0; v < kVertices; ++v) {
      if (v == best) continue;
      for (std::size_t i = 0; i < Dim; ++i) x[v][i] = x[best][i] + opts.shrink * (x[v][i] - x[best][i]);
      fx[v] = eval(x[v]);
    }
  }

  const auto best = static_cast<std::size_t>(std::min_element(fx.begin(), fx.end()) - fx.begin());
  result.argmin = x[best];
  result.value = fx[best];
  result.iterations = iter;
  return result;
}

/// Two-parameter convenience wrapper.
template <class F>
MinimizeResult<2> minimize(F&& f, const Point<2>& start, const Point<2>& scale, const MinimizeOptions& opts = {}) {
  return nelder_mead<2>(std::forward<F>(f), start, scale, opts);
}

}  // namespace rmtlab
