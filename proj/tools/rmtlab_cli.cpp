// rmtlab: command-line front end for the Monte Carlo pipelines.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rmtlab/rmtlab.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// Run configuration

struct EnsembleOptions {
  std::string ensemble = "plbm";
  int n = 512;
  double s = 0.7;
  double eps = 1.0;
  std::uint64_t seed = 1;
  std::string profile = "periodic";

  [[nodiscard]] rmtlab::EnsembleSpec spec() const {
    rmtlab::EnsembleSpec out;
    out.kind = ensemble == "umm" ? rmtlab::EnsembleKind::Umm : rmtlab::EnsembleKind::Plbm;
    out.n_dim = n;
    out.s = s;
    out.epsilon = eps;
    out.master_seed = seed;
    out.profile = profile == "modular" ? rmtlab::PlbmProfile::Modular : rmtlab::PlbmProfile::Periodic;
    out.validate();
    return out;
  }
};

struct RunContext {
  std::vector<std::string> argv;
  int threads = 1;
};

void add_ensemble_options(CLI::App* cmd, EnsembleOptions& o) {
  cmd->add_option("--ensemble", o.ensemble, "Ensemble: plbm or umm")
      ->check(CLI::IsMember({"plbm", "umm"}))
      ->capture_default_str();
  cmd->add_option("--n", o.n, "Matrix dimension N")->capture_default_str();
  cmd->add_option("--s", o.s, "Decay exponent s")->capture_default_str();
  cmd->add_option("--eps", o.eps, "Variance prefactor epsilon")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Master seed (RMTLAB_SEED overrides config files)")->capture_default_str();
  cmd->add_option("--profile", o.profile, "PLBM profile: periodic or modular")
      ->check(CLI::IsMember({"periodic", "modular"}))
      ->capture_default_str();
}

// Precedence: flag > RMTLAB_SEED > config file > default.
void apply_seed_env(EnsembleOptions& o, const std::vector<std::string>& argv) {
  const bool flagged = std::any_of(argv.begin(), argv.end(), [](const std::string& a) {
    return a == "--seed" || a.rfind("--seed=", 0) == 0;
  });
  if (flagged) return;
  if (const char* env = std::getenv("RMTLAB_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument("");
      o.seed = v;
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("RMTLAB_SEED is not an unsigned integer: '") + env + "'");
    }
  }
}

rmtlab::SpectralWindow parse_window(const std::string& text) {
  if (text == "middle-half") return rmtlab::SpectralWindow::middle_half();
  const std::string prefix = "centered:";
  if (text.rfind(prefix, 0) == 0) {
    try {
      return rmtlab::SpectralWindow::centered(std::stoi(text.substr(prefix.size())));
    } catch (const std::logic_error&) {
    }
  }
  throw std::invalid_argument("window must be 'middle-half' or 'centered:<M>', got '" + text + "'");
}

/// "default", "even:<count>" or a comma-separated list of 1-based indices.
std::vector<int> parse_components(const std::string& text, int n, const std::vector<int>& fallback) {
  if (text == "default") return fallback;
  if (text.rfind("even:", 0) == 0) return rmtlab::evenly_spaced_components(n, std::stoi(text.substr(5)));
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw std::invalid_argument("bad component index '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty component list");
  return out;
}

std::string tag(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

json run_metadata(const std::string& command, const RunContext& ctx, json config) {
  json j;
  j["tool"] = "rmtlab";
  j["command"] = command;
  std::vector<std::string> args(ctx.argv.begin() + 1, ctx.argv.end());
  // Thread count never changes results; leave it out so metadata is
  // byte-identical across --threads values.
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--threads" && k + 1 < args.size()) {
      args.erase(args.begin() + k, args.begin() + k + 2);
      --k;
    } else if (args[k].rfind("--threads=", 0) == 0) {
      args.erase(args.begin() + k);
      --k;
    }
  }
  j["arguments"] = args;
  j["config"] = std::move(config);
  j["provenance"] = rmtlab::provenance();
  return j;
}

void write_metadata(const fs::path& dir, const json& meta) { rmtlab::write_file(dir / "metadata.json", rmtlab::dump_json(meta)); }

void write_histogram(const fs::path& path, const rmtlab::Histogram& h) {
  rmtlab::write_csv_file(path, [&](std::ostream& os) { rmtlab::write_histogram_csv(os, h); });
}

/// Curve on an even grid written with the histogram schema.
template <class Pdf>
void write_curve(const fs::path& path, double lo, double hi, int points, Pdf&& pdf) {
  rmtlab::write_csv_file(path, [&](std::ostream& os) {
    os << "bin_center,density\n";
    for (int k = 0; k < points; ++k) {
      const double x = lo + (hi - lo) * k / (points - 1);
      os << rmtlab::format_double(x) << ',' << rmtlab::format_double(pdf(x)) << '\n';
    }
  });
}

json histogram_summary(const rmtlab::Histogram& h) {
  return {{"bins", h.bins()},
          {"lo", h.bin_edges.front()},
          {"hi", h.bin_edges.back()},
          {"samples", h.sample_count},
          {"excluded", h.excluded}};
}

json window_json(const rmtlab::SpectralWindow& w, int n) {
  const auto [first, last] = w.range(n);
  return {{"window", w.describe()}, {"first_index", first}, {"last_index_exclusive", last}};
}

// ---------------------------------------------------------------------------
// sample

struct SampleOptions {
  EnsembleOptions ens;
  int realisations = 1000;
  std::string window = "middle-half";
  std::string components = "default";
  double bin_width = 0.05;
  double half_range = 6.0;
  bool write_values = false;
  std::string out = "rmtlab-out/sample";
};

int cmd_sample(SampleOptions& o, const RunContext& ctx) {
  apply_seed_env(o.ens, ctx.argv);
  const auto spec = o.ens.spec();
  const auto window = parse_window(o.window);
  const auto components = parse_components(o.components, spec.n_dim, rmtlab::default_component_indices(spec.n_dim));
  const auto set = rmtlab::collect_components(spec, o.realisations, window, components, ctx.threads);
  const auto h = rmtlab::build_histogram(set.values, o.bin_width, o.half_range);
  const fs::path dir(o.out);
  write_histogram(dir / "histogram.csv", h);
  if (o.write_values) {
    rmtlab::write_csv_file(dir / "values.csv", [&](std::ostream& os) { rmtlab::write_values_csv(os, set.values); });
  }
  json config = rmtlab::to_json(spec);
  config["realisations"] = o.realisations;
  config["spectral_window"] = window_json(window, spec.n_dim);
  config["components"] = components;
  config["bin_width"] = o.bin_width;
  config["half_range"] = o.half_range;
  auto meta = run_metadata("sample", ctx, config);
  meta["histogram"] = histogram_summary(h);
  write_metadata(dir, meta);
  std::cout << "wrote " << (dir / "histogram.csv").string() << " (" << set.values.size() << " samples)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fit

struct FitOptions {
  std::string histogram;
  double density_floor = rmtlab::kDefaultDensityFloor;
  std::string out;
};

int cmd_fit(FitOptions& o, const RunContext& ctx) {
  const auto table = rmtlab::read_histogram_csv(fs::path(o.histogram));
  rmtlab::GhdFitOptions opts;
  opts.density_floor = o.density_floor;
  const auto fit = rmtlab::fit_ghd(table, opts);
  const json result = rmtlab::to_json(fit);
  std::cout << rmtlab::dump_json(result);
  if (!o.out.empty()) {
    const fs::path dir(o.out);
    rmtlab::write_file(dir / "fit.json", rmtlab::dump_json(result));
    const rmtlab::GhdDensity pdf(fit.params());
    write_curve(dir / "fit_curve.csv", -6.0, 6.0, 1201, pdf);
    json config{{"histogram", o.histogram}, {"density_floor", o.density_floor}};
    write_metadata(dir, run_metadata("fit", ctx, config));
  }
  return 0;
}

// ---------------------------------------------------------------------------
// variance

struct VarianceOptions {
  EnsembleOptions ens;
  int realisations = 1000;
  std::vector<int> m_windows = {50, 100, 200};
  std::string components = "default";
  double bin_width = 0.05;
  double range_max = 4.0;
  bool overlays = false;
  std::vector<double> gig;  // lambda, xi
  std::string out = "rmtlab-out/variance";
};

void write_variance_outputs(const fs::path& dir, const std::string& suffix, const rmtlab::VarianceSampleSet& set,
                            double bin_width, double range_max, json& summary) {
  const auto h = rmtlab::build_histogram(set.values, bin_width, 0.0, range_max);
  rmtlab::write_csv_file(dir / ("variance" + suffix + ".csv"),
                         [&](std::ostream& os) { rmtlab::write_values_csv(os, set.values); });
  write_histogram(dir / ("histogram" + suffix + ".csv"), h);
  summary["histogram" + suffix] = histogram_summary(h);
}

void write_goe_overlays(const fs::path& dir, int m, double range_max) {
  const rmtlab::Chi2Params chi(m);
  write_curve(dir / ("chi2_M" + std::to_string(m) + ".csv"), 0.0, range_max, 801,
              [&](double x) { return x > 0.0 ? rmtlab::chi2_pdf(x, chi) : 0.0; });
  write_curve(dir / ("gaussian_M" + std::to_string(m) + ".csv"), 0.0, range_max, 801,
              [&](double x) { return rmtlab::goe_local_variance_pdf(x, m); });
}

void write_gig_overlay(const fs::path& path, const rmtlab::GhdParams& p, double range_max) {
  write_curve(path, 0.0, range_max, 801, [&](double x) { return x > 0.0 ? rmtlab::gig_pdf(x, p) : 0.0; });
}

int cmd_variance(VarianceOptions& o, const RunContext& ctx) {
  apply_seed_env(o.ens, ctx.argv);
  const auto spec = o.ens.spec();
  const auto components = parse_components(o.components, spec.n_dim, rmtlab::default_variance_components(spec.n_dim));
  if (!o.gig.empty() && o.gig.size() != 2) throw std::invalid_argument("--gig expects LAMBDA,XI");
  rmtlab::SampleRequest req;
  req.variance_windows = o.m_windows;
  req.variance_components = components;
  const auto bundle = rmtlab::collect_samples(spec, o.realisations, req, ctx.threads);
  const fs::path dir(o.out);
  json summary;
  for (const auto& set : bundle.variances) {
    const int m = set.window.m_window;
    write_variance_outputs(dir, "_M" + std::to_string(m), set, o.bin_width, o.range_max, summary);
    if (o.overlays) write_goe_overlays(dir, m, o.range_max);
  }
  if (o.gig.size() == 2) write_gig_overlay(dir / "gig.csv", rmtlab::constrain_unit_variance(o.gig[0], o.gig[1]), o.range_max);
  json config = rmtlab::to_json(spec);
  config["realisations"] = o.realisations;
  config["m_windows"] = o.m_windows;
  config["components"] = components;
  config["bin_width"] = o.bin_width;
  config["range"] = {0.0, o.range_max};
  auto meta = run_metadata("variance", ctx, config);
  meta["outputs"] = summary;
  write_metadata(dir, meta);
  std::cout << "wrote local variance data for " << o.m_windows.size() << " windows to " << dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// scan-n

struct ScanOptions {
  EnsembleOptions ens;
  std::vector<int> n_values = {256, 512, 1024};
  std::vector<int> realisations = {300};
  std::string window = "middle-half";
  std::string components = "default";
  double bin_width = 0.05;
  double half_range = 6.0;
  std::string out = "rmtlab-out/scan";
};

std::function<std::vector<int>(int)> component_selector(const std::string& text) {
  return [text](int n) { return parse_components(text, n, rmtlab::default_component_indices(n)); };
}

json scan_to_disk(const fs::path& dir, const rmtlab::ScanResult& scan) {
  json files = json::array();
  for (const auto& e : scan.entries) {
    const auto name = "histogram_N" + std::to_string(e.n_dim) + ".csv";
    write_histogram(dir / name, e.histogram);
    files.push_back({{"n", e.n_dim}, {"realisations", e.realisations}, {"file", name}});
  }
  rmtlab::write_csv_file(dir / "distances.csv", [&](std::ostream& os) {
    os << "n_from,n_to,sup_distance\n";
    for (std::size_t k = 0; k < scan.consecutive_distances.size(); ++k) {
      os << scan.entries[k].n_dim << ',' << scan.entries[k + 1].n_dim << ','
         << rmtlab::format_double(scan.consecutive_distances[k]) << '\n';
    }
  });
  return files;
}

int cmd_scan(ScanOptions& o, const RunContext& ctx) {
  apply_seed_env(o.ens, ctx.argv);
  auto base = o.ens;
  base.n = o.n_values.empty() ? base.n : o.n_values.front();
  const auto spec = base.spec();
  std::vector<int> counts = o.realisations;
  if (counts.size() == 1) counts.assign(o.n_values.size(), counts.front());
  const auto window = parse_window(o.window);
  const rmtlab::ComponentBinning binning{o.bin_width, o.half_range};
  const auto scan =
      rmtlab::n_independence_scan(spec, o.n_values, counts, window, component_selector(o.components), binning, ctx.threads);
  const fs::path dir(o.out);
  json config = rmtlab::to_json(spec);
  config.erase("n");
  config["n_values"] = o.n_values;
  config["realisations"] = counts;
  config["spectral_window"] = window.describe();
  config["components"] = o.components;
  config["bin_width"] = o.bin_width;
  config["half_range"] = o.half_range;
  auto meta = run_metadata("scan-n", ctx, config);
  meta["histograms"] = scan_to_disk(dir, scan);
  meta["consecutive_distances"] = scan.consecutive_distances;
  write_metadata(dir, meta);
  for (std::size_t k = 0; k < scan.consecutive_distances.size(); ++k) {
    std::cout << "sup|P(N=" << scan.entries[k + 1].n_dim << ") - P(N=" << scan.entries[k].n_dim
              << ")| = " << scan.consecutive_distances[k] << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// diagnostics

struct DiagnosticsOptions {
  EnsembleOptions ens;
  std::vector<int> moments;
  int realisations = 100;
  std::string out;
};

int cmd_diagnostics(DiagnosticsOptions& o, const RunContext& ctx) {
  apply_seed_env(o.ens, ctx.argv);
  const auto spec = o.ens.spec();
  const auto report = rmtlab::localization_diagnostics(spec);
  json result = rmtlab::to_json(spec);
  result["s1"] = report.s1;
  result["s2"] = report.s2;
  result["regime"] = rmtlab::to_string(report.regime);
  json moments = json::array();
  for (int order : o.moments) {
    const auto e = rmtlab::trace_moment(spec, order, o.realisations, ctx.threads);
    moments.push_back({{"order", order}, {"mean", e.mean}, {"standard_error", e.standard_error}, {"realisations", e.count}});
  }
  if (!o.moments.empty()) result["trace_moments"] = moments;
  std::cout << rmtlab::dump_json(result);
  if (!o.out.empty()) {
    const fs::path dir(o.out);
    rmtlab::write_file(dir / "diagnostics.json", rmtlab::dump_json(result));
    json config = rmtlab::to_json(spec);
    config["moments"] = o.moments;
    config["realisations"] = o.realisations;
    write_metadata(dir, run_metadata("diagnostics", ctx, config));
  }
  return 0;
}

// ---------------------------------------------------------------------------
// chi2-map

struct Chi2MapOptions {
  std::vector<double> xi = {0.02, 0.2, 2.0};
  double lambda_min = -3.0;
  double lambda_max = 5.0;
  double lambda_step = 0.1;
  std::string out = "rmtlab-out/chi2-map";
};

json chi2_map_to_disk(const fs::path& dir, const Chi2MapOptions& o) {
  if (!(o.lambda_step > 0.0) || !(o.lambda_max >= o.lambda_min)) throw std::invalid_argument("bad lambda grid");
  const int steps = static_cast<int>(std::floor((o.lambda_max - o.lambda_min) / o.lambda_step + 1e-9));
  json files = json::array();
  for (double xi : o.xi) {
    const auto name = "chi2_map_xi" + tag(xi) + ".csv";
    rmtlab::write_csv_file(dir / name, [&](std::ostream& os) {
      os << "lambda,nu,residual\n";
      for (int k = 0; k <= steps; ++k) {
        const double lambda = o.lambda_min + k * o.lambda_step;
        const auto fit = rmtlab::fit_chi2_to_ghd(lambda, xi);
        os << rmtlab::format_double(lambda) << ',' << rmtlab::format_double(fit.nu) << ','
           << rmtlab::format_double(fit.residual) << '\n';
      }
    });
    files.push_back({{"xi", xi}, {"file", name}});
  }
  return files;
}

json chi2_map_config(const Chi2MapOptions& o) {
  return {{"xi", o.xi},
          {"lambda_min", o.lambda_min},
          {"lambda_max", o.lambda_max},
          {"lambda_step", o.lambda_step},
          {"fit_interval", {rmtlab::kChi2FitLower, rmtlab::kChi2FitUpper}},
          {"fit_grid_points", rmtlab::kChi2FitGridPoints}};
}

int cmd_chi2_map(Chi2MapOptions& o, const RunContext& ctx) {
  const fs::path dir(o.out);
  auto meta = run_metadata("chi2-map", ctx, chi2_map_config(o));
  meta["curves"] = chi2_map_to_disk(dir, o);
  write_metadata(dir, meta);
  std::cout << "wrote " << o.xi.size() << " chi-squared curves to " << dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// reproduce

struct ReproduceOptions {
  std::string figure;
  std::string scale = "desk";
  std::optional<int> realisations;
  std::optional<int> n_max;
  std::uint64_t seed = 1;
  std::string out;
};

const std::vector<std::string> kFigures = {"fig2", "fig3", "fig4", "fig5", "fig6",
                                           "fig7", "fig8", "fig9", "fig10"};

struct Preset {
  bool full;
  int realisations;
  int n_single;
  std::vector<int> n_scan;
};

Preset make_preset(const ReproduceOptions& o, int full_single) {
  Preset p;
  p.full = o.scale == "full";
  p.realisations = o.realisations.value_or(p.full ? 1000 : 300);
  p.n_single = p.full ? full_single : 1024;
  p.n_scan = p.full ? std::vector<int>{512, 1024, 2048, 4096, 8192} : std::vector<int>{256, 512, 1024};
  if (o.n_max) {
    p.n_single = std::min(p.n_single, *o.n_max);
    std::erase_if(p.n_scan, [&](int n) { return n > *o.n_max; });
    if (p.n_scan.size() < 2) p.n_scan = {*o.n_max / 2, *o.n_max};
  }
  return p;
}

rmtlab::EnsembleSpec figure_spec(rmtlab::EnsembleKind kind, int n, double s, double eps, std::uint64_t seed) {
  rmtlab::EnsembleSpec spec;
  spec.kind = kind;
  spec.n_dim = n;
  spec.s = s;
  spec.epsilon = eps;
  spec.master_seed = seed;
  spec.validate();
  return spec;
}

void write_ptd(const fs::path& dir) {
  write_curve(dir / "ptd_curve.csv", -6.0, 6.0, 1201, [](double x) { return rmtlab::ptd_pdf(x); });
}

json write_fit(const fs::path& dir, const std::string& suffix, const rmtlab::Histogram& h) {
  const auto fit = rmtlab::fit_ghd(h);
  const json j = rmtlab::to_json(fit);
  rmtlab::write_file(dir / ("fit" + suffix + ".json"), rmtlab::dump_json(j));
  write_curve(dir / ("fit_curve" + suffix + ".csv"), -6.0, 6.0, 1201, rmtlab::GhdDensity(fit.params()));
  return j;
}

json reproduce_scan(const fs::path& dir, rmtlab::EnsembleKind kind, double s, const Preset& p, std::uint64_t seed,
                    int threads, bool fit_largest) {
  const auto base = figure_spec(kind, p.n_scan.front(), s, 1.0, seed);
  const std::vector<int> counts(p.n_scan.size(), p.realisations);
  const auto scan = rmtlab::n_independence_scan(base, p.n_scan, counts, rmtlab::SpectralWindow::middle_half(),
                                                rmtlab::default_component_indices, {}, threads);
  json out;
  out["ensemble"] = rmtlab::to_json(base);
  out["ensemble"].erase("n");
  out["n_values"] = p.n_scan;
  out["realisations"] = p.realisations;
  out["spectral_window"] = "middle-half";
  out["components"] = "1, N/4, N/2";
  out["histograms"] = scan_to_disk(dir, scan);
  out["consecutive_distances"] = scan.consecutive_distances;
  if (fit_largest) out["fit"] = write_fit(dir, "", scan.entries.back().histogram);
  write_ptd(dir);
  return out;
}

json reproduce_eps_fits(const fs::path& dir, rmtlab::EnsembleKind kind, const Preset& p, std::uint64_t seed,
                        int threads) {
  json out = json::array();
  for (double eps : {0.3, 0.5, 1.5}) {
    const auto spec = figure_spec(kind, p.n_single, 0.7, eps, seed);
    const auto n = spec.n_dim;
    const auto set = rmtlab::collect_components(spec, p.realisations, rmtlab::SpectralWindow::middle_half(),
                                                rmtlab::default_component_indices(n), threads);
    const auto h = rmtlab::build_histogram(set.values, 0.05, 6.0);
    const auto suffix = "_eps" + tag(eps);
    write_histogram(dir / ("histogram" + suffix + ".csv"), h);
    json entry;
    entry["ensemble"] = rmtlab::to_json(spec);
    entry["realisations"] = p.realisations;
    entry["fit"] = write_fit(dir, suffix, h);
    out.push_back(entry);
  }
  write_ptd(dir);
  return out;
}

struct VarianceRun {
  double eps;
  std::vector<int> m_windows;
};

json reproduce_variance(const fs::path& dir, rmtlab::EnsembleKind kind, double s, const std::vector<VarianceRun>& runs,
                        const Preset& p, std::uint64_t seed, int threads, bool goe_overlays) {
  constexpr double kRangeMax = 4.0;
  json out = json::array();
  for (const auto& run : runs) {
    const auto spec = figure_spec(kind, p.n_single, s, run.eps, seed);
    const int n = spec.n_dim;
    rmtlab::SampleRequest req;
    req.variance_windows = run.m_windows;
    req.variance_components = rmtlab::default_variance_components(n);
    if (!goe_overlays) {
      // Component histogram from the same realisations for the GIG overlay.
      req.component_window = rmtlab::SpectralWindow::middle_half();
      req.component_indices = rmtlab::default_component_indices(n);
    }
    const auto bundle = rmtlab::collect_samples(spec, p.realisations, req, threads);
    const auto eps_tag = "_eps" + tag(run.eps);
    json entry;
    entry["ensemble"] = rmtlab::to_json(spec);
    entry["realisations"] = p.realisations;
    entry["m_windows"] = run.m_windows;
    entry["components"] = req.variance_components;
    json summary;
    for (const auto& set : bundle.variances) {
      const int m = set.window.m_window;
      write_variance_outputs(dir, eps_tag + "_M" + std::to_string(m), set, 0.05, kRangeMax, summary);
      if (goe_overlays) write_goe_overlays(dir, m, kRangeMax);
    }
    entry["outputs"] = summary;
    if (bundle.components) {
      const auto h = rmtlab::build_histogram(bundle.components->values, 0.05, 6.0);
      write_histogram(dir / ("components" + eps_tag + ".csv"), h);
      const auto fit = write_fit(dir, eps_tag, h);
      entry["fit"] = fit;
      write_gig_overlay(dir / ("gig" + eps_tag + ".csv"),
                        rmtlab::constrain_unit_variance(fit["lambda"].get<double>(), fit["xi"].get<double>()), kRangeMax);
    }
    out.push_back(entry);
  }
  return out;
}

int cmd_reproduce(ReproduceOptions& o, const RunContext& ctx) {
  if (std::find(kFigures.begin(), kFigures.end(), o.figure) == kFigures.end()) {
    std::string valid;
    for (const auto& f : kFigures) valid += (valid.empty() ? "" : ", ") + f;
    throw std::invalid_argument("unknown figure '" + o.figure + "'; valid ids: " + valid);
  }
  EnsembleOptions seed_holder;
  seed_holder.seed = o.seed;
  apply_seed_env(seed_holder, ctx.argv);
  const std::uint64_t seed = seed_holder.seed;
  const fs::path dir(o.out.empty() ? "rmtlab-out/" + o.figure : o.out);
  const auto plbm = rmtlab::EnsembleKind::Plbm;
  const auto umm = rmtlab::EnsembleKind::Umm;

  json config{{"figure", o.figure}, {"scale", o.scale}, {"seed", seed}};
  if (o.realisations) config["realisations_override"] = *o.realisations;
  if (o.n_max) config["n_max"] = *o.n_max;
  json result;
  if (o.figure == "fig2") {
    result = reproduce_scan(dir, plbm, 0.7, make_preset(o, 8192), seed, ctx.threads, true);
  } else if (o.figure == "fig3") {
    result = reproduce_scan(dir, umm, 0.7, make_preset(o, 8192), seed, ctx.threads, true);
  } else if (o.figure == "fig4") {
    result = reproduce_scan(dir, plbm, 0.3, make_preset(o, 8192), seed, ctx.threads, false);
  } else if (o.figure == "fig5") {
    result = reproduce_eps_fits(dir, plbm, make_preset(o, 8192), seed, ctx.threads);
  } else if (o.figure == "fig6") {
    result = reproduce_eps_fits(dir, umm, make_preset(o, 2048), seed, ctx.threads);
  } else if (o.figure == "fig7") {
    result = reproduce_variance(dir, plbm, 0.7, {{1.0, {50, 100, 200}}, {0.5, {100}}}, make_preset(o, 4096), seed,
                                ctx.threads, false);
  } else if (o.figure == "fig8") {
    Chi2MapOptions map;
    result["curves"] = chi2_map_to_disk(dir, map);
    result["chi2_map"] = chi2_map_config(map);
  } else if (o.figure == "fig9") {
    result = reproduce_variance(dir, umm, 0.7, {{1.0, {50, 100, 200}}, {0.5, {100}}}, make_preset(o, 4096), seed,
                                ctx.threads, false);
  } else {
    result = reproduce_variance(dir, plbm, 0.3, {{1.0, {50, 100, 200}}}, make_preset(o, 4096), seed, ctx.threads,
                                true);
  }
  auto meta = run_metadata("reproduce", ctx, config);
  meta["figure"] = result;
  write_metadata(dir, meta);
  std::cout << "wrote " << o.figure << " (" << o.scale << ") bundle to " << dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo lab for power-law banded and ultrametric random matrices", "rmtlab"};
  app.set_version_flag("--version", rmtlab::kVersion);
  app.set_config("--config", "", "TOML configuration file; command-line flags take precedence");
  app.require_subcommand(1);

  RunContext ctx;
  ctx.argv.assign(argv, argv + argc);
  app.add_option("--threads", ctx.threads, "Worker threads (results do not depend on this)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  SampleOptions sample;
  auto* c_sample = app.add_subcommand("sample", "Histogram of rescaled eigenvector components");
  add_ensemble_options(c_sample, sample.ens);
  c_sample->add_option("--realisations,--realizations", sample.realisations, "Number of realisations")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_sample->add_option("--window", sample.window, "middle-half or centered:<M>")->capture_default_str();
  c_sample->add_option("--components", sample.components, "default, even:<count> or a list like 1,128,256")
      ->capture_default_str();
  c_sample->add_option("--bin-width", sample.bin_width)->capture_default_str();
  c_sample->add_option("--half-range", sample.half_range)->capture_default_str();
  c_sample->add_flag("--write-values", sample.write_values, "Also write raw samples to values.csv");
  c_sample->add_option("--out", sample.out, "Output directory")->capture_default_str();

  FitOptions fit;
  auto* c_fit = app.add_subcommand("fit", "Fit the unit-variance GHD to a histogram CSV");
  c_fit->add_option("histogram", fit.histogram, "CSV with header bin_center,density")->required();
  c_fit->add_option("--density-floor", fit.density_floor, "Bins with lower density are left out")
      ->capture_default_str();
  c_fit->add_option("--out", fit.out, "Directory for fit.json, fit_curve.csv and metadata");

  VarianceOptions variance;
  auto* c_var = app.add_subcommand("variance", "Distribution of the local eigenvector variance");
  add_ensemble_options(c_var, variance.ens);
  c_var->add_option("--realisations,--realizations", variance.realisations)->check(CLI::PositiveNumber)->capture_default_str();
  c_var->add_option("--m-windows", variance.m_windows, "Window sizes M_I")->delimiter(',')->capture_default_str();
  c_var->add_option("--components", variance.components, "default, even:<count> or a list")->capture_default_str();
  c_var->add_option("--bin-width", variance.bin_width)->capture_default_str();
  c_var->add_option("--range-max", variance.range_max)->capture_default_str();
  c_var->add_flag("--overlays", variance.overlays, "Write chi-squared and Gaussian reference curves");
  c_var->add_option("--gig", variance.gig, "LAMBDA,XI of a unit-variance GHD; writes its GIG curve")->delimiter(',');
  c_var->add_option("--out", variance.out)->capture_default_str();

  ScanOptions scan;
  auto* c_scan = app.add_subcommand("scan-n", "Component histograms across matrix dimensions");
  add_ensemble_options(c_scan, scan.ens);
  c_scan->add_option("--n-values", scan.n_values)->delimiter(',')->capture_default_str();
  c_scan->add_option("--realisations,--realizations", scan.realisations, "One count, or one per N")
      ->delimiter(',')
      ->capture_default_str();
  c_scan->add_option("--window", scan.window)->capture_default_str();
  c_scan->add_option("--components", scan.components)->capture_default_str();
  c_scan->add_option("--bin-width", scan.bin_width)->capture_default_str();
  c_scan->add_option("--half-range", scan.half_range)->capture_default_str();
  c_scan->add_option("--out", scan.out)->capture_default_str();

  DiagnosticsOptions diag;
  auto* c_diag = app.add_subcommand("diagnostics", "S1, S2, regime and trace moments");
  add_ensemble_options(c_diag, diag.ens);
  c_diag->add_option("--moments", diag.moments, "Trace moment orders to estimate")->delimiter(',');
  c_diag->add_option("--realisations,--realizations", diag.realisations)->check(CLI::PositiveNumber)->capture_default_str();
  c_diag->add_option("--out", diag.out);

  Chi2MapOptions chi2;
  auto* c_chi2 = app.add_subcommand("chi2-map", "Best chi-squared degrees of freedom against lambda");
  c_chi2->add_option("--xi", chi2.xi)->delimiter(',')->capture_default_str();
  c_chi2->add_option("--lambda-min", chi2.lambda_min)->capture_default_str();
  c_chi2->add_option("--lambda-max", chi2.lambda_max)->capture_default_str();
  c_chi2->add_option("--lambda-step", chi2.lambda_step)->capture_default_str();
  c_chi2->add_option("--out", chi2.out)->capture_default_str();

  ReproduceOptions repro;
  auto* c_repro = app.add_subcommand("reproduce", "Canned data bundle for one figure");
  c_repro->add_option("figure", repro.figure, "fig2 ... fig10")->required();
  c_repro->add_option("--scale", repro.scale)->check(CLI::IsMember({"desk", "full"}))->capture_default_str();
  c_repro->add_option("--realisations,--realizations", repro.realisations, "Override the preset count")
      ->check(CLI::PositiveNumber);
  c_repro->add_option("--n-max", repro.n_max, "Cap on matrix dimensions")->check(CLI::PositiveNumber);
  c_repro->add_option("--seed", repro.seed)->capture_default_str();
  c_repro->add_option("--out", repro.out, "Output directory (default rmtlab-out/<figure>)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*c_sample) return cmd_sample(sample, ctx);
    if (*c_fit) return cmd_fit(fit, ctx);
    if (*c_var) return cmd_variance(variance, ctx);
    if (*c_scan) return cmd_scan(scan, ctx);
    if (*c_diag) return cmd_diagnostics(diag, ctx);
    if (*c_chi2) return cmd_chi2_map(chi2, ctx);
    if (*c_repro) return cmd_reproduce(repro, ctx);
  } catch (const std::exception& e) {
    std::cerr << "rmtlab: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
