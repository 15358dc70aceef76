// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.
//
//   acceptance --suite analytic|montecarlo|determinism|all [--threads k]

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "rmtlab/rmtlab.hpp"
#include "support.hpp"

namespace {

using rmtlab::EnsembleKind;
using rmtlab::EnsembleSpec;
using rmtlab::GhdDensity;
using rmtlab::Histogram;
using rmtlab::SpectralWindow;

constexpr double kInf = std::numeric_limits<double>::infinity();

class Report {
 public:
  void record(const std::string& id, const std::string& title, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS" : "FAIL") << " [" << id << "] " << title << ": " << detail << std::endl;
    failures_ += pass ? 0 : 1;
  }
  [[nodiscard]] int failures() const { return failures_; }

 private:
  int failures_ = 0;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// Analytic layer

struct GridPoint {
  double lambda;
  double xi;
};

std::vector<GridPoint> lambda_xi_grid() {
  std::vector<GridPoint> grid;
  for (double lambda : {-1.0, 0.0, 0.5, 3.0}) {
    for (double xi : {0.02, 0.2, 2.0}) grid.push_back({lambda, xi});
  }
  return grid;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

void bessel_identities(Report& report) {
  const std::vector<double> xs = {0.05, 0.5, 0.76, 2.0, 5.0, 10.0, 30.0};
  double closed = 0.0;
  for (double x : xs) {
    const double k_half = std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x);
    closed = std::max(closed, rel_err(rmtlab::bessel_k(0.5, x), k_half));
    closed = std::max(closed, rel_err(rmtlab::bessel_k(-0.5, x), k_half));
    closed = std::max(closed, rel_err(rmtlab::bessel_k(1.5, x), k_half * (1.0 + 1.0 / x)));
    closed = std::max(closed, rel_err(rmtlab::bessel_k(2.5, x), k_half * (1.0 + 3.0 / x + 3.0 / (x * x))));
  }
  const std::vector<double> orders = {0.0, 0.3, 0.7, 1.7, 2.5, 5.0, 10.3, 25.0, 60.0};
  double symmetry = 0.0;
  double recurrence = 0.0;
  for (double nu : orders) {
    for (double x : xs) {
      const double lk = rmtlab::log_bessel_k(nu, x).log_magnitude;
      symmetry = std::max(symmetry, std::abs(std::expm1(rmtlab::log_bessel_k(-nu, x).log_magnitude - lk)));
      // K_{nu+1} = K_{nu-1} + (2 nu / x) K_nu, relative to the left side.
      const double up = rmtlab::log_bessel_k(nu + 1.0, x).log_magnitude;
      const double down = rmtlab::log_bessel_k(nu - 1.0, x).log_magnitude;
      const double rhs = std::exp(down - up) + (2.0 * nu / x) * std::exp(lk - up);
      recurrence = std::max(recurrence, std::abs(rhs - 1.0));
    }
  }
  const bool pass = closed <= 1e-9 && symmetry <= 1e-9 && recurrence <= 1e-9;
  report.record("1", "Bessel-K identities", pass,
                fmt("half-integer %.2e, symmetry %.2e, recurrence %.2e (limit 1e-9)", closed, symmetry,
                    recurrence));
}

void ghd_grid(Report& report) {
  double norm_err = 0.0;
  double variance_err = 0.0;
  double moment_err = 0.0;
  double mixture_err = 0.0;
  const std::vector<double> xs = {0.0, 0.1, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 10.0};
  for (const auto& g : lambda_xi_grid()) {
    const auto p = rmtlab::constrain_unit_variance(g.lambda, g.xi);
    const GhdDensity pdf(p);
    const double total = 2.0 * rmtlab::testing::oracle_integral([&](double x) { return pdf(x); }, 0.0, kInf);
    norm_err = std::max(norm_err, std::abs(total - 1.0));
    variance_err = std::max(variance_err, std::abs(rmtlab::ghd_moment(1.0, p) - 1.0));
    for (int q = 1; q <= 4; ++q) {
      const double numeric = 2.0 * rmtlab::testing::oracle_integral_positive([&](double x) {
        const double f = pdf(x);
        return f > 0.0 ? std::pow(x, 2 * q) * f : 0.0;
      });
      moment_err = std::max(moment_err, rel_err(rmtlab::ghd_moment(q, p), numeric));
    }
    for (double x : xs) mixture_err = std::max(mixture_err, std::abs(rmtlab::mixture_pdf(x, p) - pdf(x)));
  }
  const bool pass = norm_err <= 1e-8 && variance_err <= 1e-10 && moment_err <= 1e-7 && mixture_err <= 1e-8;
  report.record("2", "GHD normalisation, unit variance, moments, mixture (12-point grid)", pass,
                fmt("|norm-1| %.2e (1e-8), |C1-1| %.2e (1e-10), moment rel %.2e (1e-7), mixture %.2e (1e-8)",
                    norm_err, variance_err, moment_err, mixture_err));
}

void ptd_limit(Report& report) {
  double worst = 0.0;
  for (double lambda : {150.0, -150.0}) {
    for (double xi : {0.02, 0.2, 2.0}) {
      const GhdDensity pdf(rmtlab::constrain_unit_variance(lambda, xi));
      for (double x = -8.0; x <= 8.0; x += 0.005) worst = std::max(worst, std::abs(pdf(x) - rmtlab::ptd_pdf(x)));
    }
  }
  report.record("3", "Porter-Thomas limit at lambda = +-150", worst <= 0.02,
                fmt("sup-norm %.4f (limit 0.02)", worst));
}

struct ReferenceFit {
  const char* name;
  double lambda;
  double alpha;
  double delta;
};

void reference_fit_consistency(Report& report) {
  const std::vector<ReferenceFit> fits = {
      {"PLBM eps=1", 3.3615, 2.6154, 0.2903},      {"UMM eps=1", 0.3880, 1.1673, 0.4409},
      {"PLBM eps=0.3", -0.1067, 0.6506, 0.2805},   {"PLBM eps=0.5", 0.5862, 1.2754, 0.3945},
      {"PLBM eps=1.5", 3.6392, 2.9341, 1.0377},    {"UMM eps=0.3", -0.2989, 0.2959, 0.1188},
      {"UMM eps=0.5", -0.1857, 0.5257, 0.2262},    {"UMM eps=1.5", 1.0960, 1.6812, 0.5811},
  };
  double worst = 0.0;
  std::string worst_name;
  for (const auto& c : fits) {
    const auto p = rmtlab::constrain_unit_variance(c.lambda, c.alpha * c.delta);
    const double dev = std::max(rel_err(p.alpha(), c.alpha), rel_err(p.delta(), c.delta));
    if (dev > worst) {
      worst = dev;
      worst_name = c.name;
    }
  }
  report.record("4", "Reference fits obey the unit-variance constraint", worst <= 0.01,
                fmt("%zu fits, worst relative deviation %.2e (%s), limit 1e-2", fits.size(), worst,
                    worst_name.c_str()));
}

void chi2_map(Report& report) {
  double limit_dev = 0.0;
  for (double xi : {0.02, 0.2, 2.0}) limit_dev = std::max(limit_dev, std::abs(rmtlab::fit_chi2_to_ghd(150.0, xi).nu - 1.0));
  double nu_min = kInf;
  double nu_max = 0.0;
  bool inside = false;
  for (double lambda = -3.0; lambda <= 5.0 + 1e-9; lambda += 0.25) {
    const double nu = rmtlab::fit_chi2_to_ghd(lambda, 0.2).nu;
    nu_min = std::min(nu_min, nu);
    nu_max = std::max(nu_max, nu);
    inside = inside || (nu >= 0.4 && nu <= 0.7);
  }
  report.record("5", "chi-squared map", limit_dev <= 0.05 && inside,
                fmt("|nu-1| at lambda=150: %.4f (limit 0.05); xi=0.2 sweep nu in [%.3f, %.3f], enters [0.4, 0.7]: %s",
                    limit_dev, nu_min, nu_max, inside ? "yes" : "no"));
}

int run_analytic() {
  Report report;
  bessel_identities(report);
  ghd_grid(report);
  ptd_limit(report);
  reference_fit_consistency(report);
  chi2_map(report);
  return report.failures();
}

// ---------------------------------------------------------------------------
// Monte Carlo layer

constexpr std::uint64_t kSeed = 20240601;
constexpr int kComponentCount = 16;   // component indices per eigenvector
constexpr int kVarianceSites = 128;   // sites per local-variance window
constexpr double kComponentBin = 0.05;
constexpr double kComponentRange = 6.0;
constexpr double kVarianceBin = 0.05;
constexpr double kVarianceMax = 4.0;

EnsembleSpec make_spec(EnsembleKind kind, int n, double s, double eps = 1.0) {
  EnsembleSpec spec;
  spec.kind = kind;
  spec.n_dim = n;
  spec.s = s;
  spec.epsilon = eps;
  spec.master_seed = kSeed;
  return spec;
}

rmtlab::SampleBundle timed_collect(const EnsembleSpec& spec, int realisations, const rmtlab::SampleRequest& req,
                                   int threads) {
  const auto start = std::chrono::steady_clock::now();
  auto bundle = rmtlab::collect_samples(spec, realisations, req, threads);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cerr << "  sampled " << rmtlab::to_string(spec.kind) << " N=" << spec.n_dim << " s=" << spec.s << " x"
            << realisations << " in " << secs << " s" << std::endl;
  return bundle;
}

rmtlab::SampleRequest component_request(int n) {
  rmtlab::SampleRequest req;
  req.component_window = SpectralWindow::middle_half();
  req.component_indices = rmtlab::evenly_spaced_components(n, kComponentCount);
  return req;
}

Histogram component_histogram(std::span<const double> values) {
  return rmtlab::build_histogram(values, kComponentBin, kComponentRange);
}

Histogram variance_histogram(std::span<const double> values) {
  return rmtlab::build_histogram(values, kVarianceBin, 0.0, kVarianceMax);
}

double peak(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

template <class Pdf>
double pdf_peak(Pdf&& pdf) {
  double best = 0.0;
  for (double x = 0.001; x <= kVarianceMax; x += 0.001) best = std::max(best, pdf(x));
  return best;
}

bool within(double value, double target, double fraction) { return std::abs(value - target) <= fraction * std::abs(target); }

int run_montecarlo(int threads) {
  Report report;

  // PLBM s = 0.3: components (criterion 6) and local variances (criterion 9).
  {
    const auto spec = make_spec(EnsembleKind::Plbm, 1024, 0.3);
    auto req = component_request(spec.n_dim);
    req.variance_windows = {50, 100, 200};
    req.variance_components = rmtlab::evenly_spaced_components(spec.n_dim, kVarianceSites);
    const auto bundle = timed_collect(spec, 300, req, threads);

    const auto& all = bundle.components->values;
    const std::size_t per_realisation = all.size() / 300;
    const std::span<const double> first200(all.data(), per_realisation * 200);
    const auto h = component_histogram(first200);
    const double sup = rmtlab::sup_distance_to(h, [](double x) { return rmtlab::ptd_pdf(x); });
    report.record("6", "GOE limit, PLBM s=0.3 N=1024 x200", sup <= 0.03,
                  fmt("sup-norm to Porter-Thomas %.4f (limit 0.03)", sup));

    std::string detail;
    bool pass = true;
    for (const auto& set : bundle.variances) {
      const int m = set.window.m_window;
      const auto vh = variance_histogram(set.values);
      if (m < 200) {
        const rmtlab::Chi2Params chi(m);
        auto pdf = [&](double x) { return x > 0.0 ? rmtlab::chi2_pdf(x, chi) : 0.0; };
        const double rel = rmtlab::sup_distance_to(vh, pdf) / pdf_peak(pdf);
        pass = pass && rel <= 0.10;
        detail += fmt("M=%d vs chi2(%d) %.3f; ", m, m, rel);
      } else {
        auto pdf = [&](double x) { return rmtlab::goe_local_variance_pdf(x, m); };
        const double rel = rmtlab::sup_distance_to(vh, pdf) / pdf_peak(pdf);
        pass = pass && rel <= 0.10;
        detail += fmt("M=%d vs Gaussian %.3f; ", m, rel);
      }
    }
    report.record("9", "Local variance, GOE side (PLBM s=0.3 N=1024 x300)", pass,
                  detail + "sup-norm relative to peak height, limit 0.10");
  }

  // PLBM s = 0.7 scan (criterion 7); the N = 1024 run also feeds 8, 10, 11.
  rmtlab::FitResult plbm_fit;
  {
    std::vector<Histogram> hists;
    rmtlab::SampleBundle large;
    for (int n : {256, 512, 1024}) {
      const auto spec = make_spec(EnsembleKind::Plbm, n, 0.7);
      auto req = component_request(n);
      if (n == 1024) {
        req.variance_windows = {50, 100, 200};
        req.variance_components = rmtlab::evenly_spaced_components(n, kVarianceSites);
      }
      auto bundle = timed_collect(spec, 300, req, threads);
      hists.push_back(component_histogram(bundle.components->values));
      if (n == 1024) large = std::move(bundle);
    }
    const double d1 = rmtlab::sup_distance(hists[0], hists[1]);
    const double d2 = rmtlab::sup_distance(hists[1], hists[2]);
    report.record("7", "N-independence, PLBM s=0.7 N=256/512/1024 x300", d1 <= 0.03 && d2 <= 0.03,
                  fmt("sup|P512-P256| %.4f, sup|P1024-P512| %.4f (limit 0.03)", d1, d2));

    plbm_fit = rmtlab::fit_ghd(hists[2]);

    const auto umm_spec = make_spec(EnsembleKind::Umm, 1024, 0.7);
    const auto umm_bundle = timed_collect(umm_spec, 300, component_request(1024), threads);
    const auto umm_fit = rmtlab::fit_ghd(component_histogram(umm_bundle.components->values));
    const double plbm_xi_ref = 2.6154 * 0.2903;
    const double umm_xi_ref = 1.1673 * 0.4409;
    const bool plbm_ok = plbm_fit.residual_rms() <= 0.01 && within(plbm_fit.lambda, 3.3615, 0.30) &&
                         within(plbm_fit.xi, plbm_xi_ref, 0.30);
    const bool umm_ok = umm_fit.residual_rms() <= 0.01 && within(umm_fit.lambda, 0.3880, 0.30) &&
                        within(umm_fit.xi, umm_xi_ref, 0.30);
    report.record(
        "8", "GHD fit quality at N=1024", plbm_ok && umm_ok,
        fmt("PLBM rms %.4f lambda %.4f (3.3615+-30%%) xi %.4f (%.4f+-30%%) %s; "
            "UMM rms %.4f lambda %.4f (0.3880+-30%%) xi %.4f (%.4f+-30%%) %s",
            plbm_fit.residual_rms(), plbm_fit.lambda, plbm_fit.xi, plbm_xi_ref, plbm_ok ? "ok" : "out",
            umm_fit.residual_rms(), umm_fit.lambda, umm_fit.xi, umm_xi_ref, umm_ok ? "ok" : "out"));

    // Criterion 10.
    std::vector<Histogram> vh;
    for (const auto& set : large.variances) vh.push_back(variance_histogram(set.values));
    double pairwise = 0.0;
    for (std::size_t a = 0; a < vh.size(); ++a) {
      for (std::size_t b = a + 1; b < vh.size(); ++b) {
        const double height = std::max(peak(vh[a].density), peak(vh[b].density));
        pairwise = std::max(pairwise, rmtlab::sup_distance(vh[a], vh[b]) / height);
      }
    }
    const auto gig_params = plbm_fit.params();
    auto gig = [&](double y) { return y > 0.0 ? rmtlab::gig_pdf(y, gig_params) : 0.0; };
    const double gig_height = pdf_peak(gig);
    std::string gig_detail;
    double gig_worst = 0.0;
    for (std::size_t k = 0; k < vh.size(); ++k) {
      const double rel = rmtlab::sup_distance_to(vh[k], gig) / gig_height;
      gig_worst = std::max(gig_worst, rel);
      gig_detail += fmt("M=%d %.3f ", large.variances[k].window.m_window, rel);
    }
    report.record("10", "Local variance, intermediate side (PLBM s=0.7 N=1024 x300)",
                  pairwise <= 0.05 && gig_worst <= 0.10,
                  fmt("pairwise %.3f of peak (limit 0.05); vs GIG at fitted parameters: ", pairwise) + gig_detail +
                      "(limit 0.10)");

    // Criterion 11.
    rmtlab::ComponentSampleSet set = *large.components;
    const auto c2 = rmtlab::fractal_prefactor(set, 2.0, plbm_fit.params());
    const double dev = std::abs(c2.empirical - c2.analytic) / c2.analytic;
    report.record("11", "Fractal prefactor C2 (PLBM s=0.7 N=1024)", dev <= 0.10,
                  fmt("empirical %.4f +- %.4f, GHD %.4f, relative difference %.3f (limit 0.10)", c2.empirical,
                      c2.standard_error, c2.analytic, dev));
  }
  return report.failures();
}

// ---------------------------------------------------------------------------
// Determinism

std::string histogram_bytes(const Histogram& h) {
  std::ostringstream os;
  rmtlab::write_histogram_csv(os, h);
  return os.str();
}

std::string values_bytes(std::span<const double> v) {
  std::ostringstream os;
  rmtlab::write_values_csv(os, v);
  return os.str();
}

/// Every CSV the small configurations of criteria 6-10 produce, concatenated.
std::string csv_bundle(int threads) {
  std::string out;
  constexpr int kRealisations = 6;
  {
    const auto spec = make_spec(EnsembleKind::Plbm, 256, 0.3);
    const auto set = rmtlab::collect_components(spec, kRealisations, SpectralWindow::middle_half(),
                                                rmtlab::evenly_spaced_components(256, kComponentCount), threads);
    out += histogram_bytes(component_histogram(set.values)) + values_bytes(set.values);
  }
  {
    const auto base = make_spec(EnsembleKind::Plbm, 256, 0.7);
    const auto scan = rmtlab::n_independence_scan(base, {256, 512}, {kRealisations, kRealisations},
                                                  SpectralWindow::middle_half(),
                                                  [](int n) { return rmtlab::evenly_spaced_components(n, kComponentCount); },
                                                  {}, threads);
    for (const auto& e : scan.entries) out += histogram_bytes(e.histogram);
    out += rmtlab::dump_json(rmtlab::to_json(rmtlab::fit_ghd(scan.entries.back().histogram)));
  }
  {
    const auto spec = make_spec(EnsembleKind::Umm, 256, 0.7);
    const auto set = rmtlab::collect_components(spec, kRealisations, SpectralWindow::middle_half(),
                                                rmtlab::evenly_spaced_components(256, kComponentCount), threads);
    out += histogram_bytes(component_histogram(set.values));
  }
  for (double s : {0.3, 0.7}) {
    const auto spec = make_spec(EnsembleKind::Plbm, 512, s);
    rmtlab::SampleRequest req;
    req.variance_windows = {50, 100, 200};
    req.variance_components = rmtlab::evenly_spaced_components(512, kVarianceSites);
    const auto bundle = rmtlab::collect_samples(spec, kRealisations, req, threads);
    for (const auto& set : bundle.variances) {
      out += values_bytes(set.values) + histogram_bytes(variance_histogram(set.values));
    }
  }
  return out;
}

int run_determinism() {
  Report report;
  const std::string one = csv_bundle(1);
  const std::string four = csv_bundle(4);
  const std::string eight = csv_bundle(8);
  const bool pass = one == four && one == eight;
  report.record("D", "Byte-identical CSVs across 1, 4 and 8 threads", pass,
                fmt("%zu bytes; 4 threads %s, 8 threads %s", one.size(), one == four ? "identical" : "differ",
                    one == eight ? "identical" : "differ"));
  return report.failures();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rmtlab acceptance suite"};
  std::string suite = "all";
  int threads = 1;
  app.add_option("--suite", suite)->check(CLI::IsMember({"analytic", "montecarlo", "determinism", "all"}));
  app.add_option("--threads", threads)->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  int failures = 0;
  if (suite == "analytic" || suite == "all") failures += run_analytic();
  if (suite == "montecarlo" || suite == "all") failures += run_montecarlo(threads);
  if (suite == "determinism" || suite == "all") failures += run_determinism();
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion(s) failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
