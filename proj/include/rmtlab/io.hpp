#pragma once

// CSV and JSON serialisation. CSV files use ',' separators, '.' decimals and
// LF line endings; numbers are written with 17 significant digits so a
// round trip is exact.

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmtlab/ensembles.hpp"
#include "rmtlab/experiments.hpp"
#include "rmtlab/fitting.hpp"
#include "rmtlab/histogram.hpp"
#include "rmtlab/random.hpp"

namespace rmtlab {

inline constexpr const char* kVersion = "0.3.0";

class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_histogram_csv(std::ostream& os, const Histogram& h) {
  os << "bin_center,density\n";
  for (std::size_t k = 0; k < h.bins(); ++k) {
    os << format_double(h.bin_center(k)) << ',' << format_double(h.density[k]) << '\n';
  }
}

inline void write_values_csv(std::ostream& os, std::span<const double> values) {
  os << "value\n";
  for (double v : values) os << format_double(v) << '\n';
}

/// Writes `contents` to `path` in binary mode, creating parent directories.
inline void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << contents;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

template <class Writer>
void write_csv_file(const std::filesystem::path& path, Writer&& writer) {
  std::ostringstream os;
  writer(os);
  write_file(path, os.str());
}

namespace detail {

inline double parse_number(const std::string& field, const std::string& source, std::size_t line) {
  if (field.empty()) throw CsvError(source, line, "empty field");
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    throw CsvError(source, line, "not a number: '" + field + "'");
  }
  if (used != field.size()) throw CsvError(source, line, "not a number: '" + field + "'");
  return v;
}

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

/// Parses a `bin_center,density` file. Errors carry the 1-based line number.
inline DensityTable read_histogram_csv(std::istream& is, const std::string& source = "<stream>") {
  DensityTable table;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(is, line)) throw CsvError(source, 1, "missing header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "bin_center,density") throw CsvError(source, line_no, "expected header 'bin_center,density'");
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_fields(line);
    if (fields.size() != 2) throw CsvError(source, line_no, "expected 2 fields, found " + std::to_string(fields.size()));
    table.centers.push_back(detail::parse_number(fields[0], source, line_no));
    table.densities.push_back(detail::parse_number(fields[1], source, line_no));
  }
  if (table.centers.empty()) throw CsvError(source, line_no, "no data rows");
  return table;
}

inline DensityTable read_histogram_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_histogram_csv(in, path.string());
}

inline std::vector<double> read_values_csv(std::istream& is, const std::string& source = "<stream>") {
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(is, line) || (line != "value" && line != "value\r")) {
    throw CsvError(source, 1, "expected header 'value'");
  }
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    values.push_back(detail::parse_number(line, source, line_no));
  }
  return values;
}

inline nlohmann::ordered_json to_json(const EnsembleSpec& spec) {
  nlohmann::ordered_json j;
  j["ensemble"] = to_string(spec.kind);
  j["n"] = spec.n_dim;
  j["s"] = spec.s;
  j["eps"] = spec.epsilon;
  j["seed"] = spec.master_seed;
  if (spec.kind == EnsembleKind::Plbm) j["profile"] = to_string(spec.profile);
  return j;
}

inline nlohmann::ordered_json to_json(const FitResult& fit) {
  nlohmann::ordered_json j;
  j["lambda"] = fit.lambda;
  j["xi"] = fit.xi;
  j["alpha"] = fit.alpha;
  j["delta"] = fit.delta;
  j["objective"] = fit.objective;
  j["residual_rms"] = fit.residual_rms();
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["protocol"] = {
      {"method", "nelder-mead least squares on (lambda, ln xi), unit variance imposed"},
      {"weighting", "unweighted density residuals"},
      {"density_floor", fit.density_floor},
      {"bins_used", fit.bins_used},
      {"starts", "(0,0.5) (2,1) (-0.3,0.1)"},
  };
  return j;
}

/// Common provenance block for run metadata.
inline nlohmann::ordered_json provenance() {
  nlohmann::ordered_json j;
  j["code_version"] = kVersion;
  j["rng"] = kRngName;
  j["gaussian_transform"] = kGaussianTransform;
  j["eigensolver"] = "lapack dsyevd";
  j["seed_derivation"] = "key = mix64(mix64(seed) ^ mix64(realisation + c)); entries row-major upper triangle";
  return j;
}

inline std::string dump_json(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace rmtlab
