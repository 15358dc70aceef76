#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rmtlab/io.hpp"

namespace {

namespace fs = std::filesystem;

rmtlab::Histogram sample_histogram() {
  const std::vector<double> xs = {-0.7, -0.2, 0.1, 0.13, 0.4, 0.9, 0.91, 1.7};
  return rmtlab::build_histogram(xs, 0.25, 1.0);
}

TEST(Csv, HistogramRoundTripIsExact) {
  const auto h = sample_histogram();
  std::ostringstream os;
  rmtlab::write_histogram_csv(os, h);
  EXPECT_EQ(os.str().rfind("bin_center,density\n", 0), 0u);
  EXPECT_EQ(os.str().find('\r'), std::string::npos);
  std::istringstream is(os.str());
  const auto table = rmtlab::read_histogram_csv(is);
  ASSERT_EQ(table.centers.size(), h.bins());
  for (std::size_t k = 0; k < h.bins(); ++k) {
    EXPECT_EQ(table.centers[k], h.bin_center(k));
    EXPECT_EQ(table.densities[k], h.density[k]);
  }
}

TEST(Csv, ValuesRoundTripIsExact) {
  const std::vector<double> values = {0.1, 1.0 / 3.0, 2.5e-300, 12345.678};
  std::ostringstream os;
  rmtlab::write_values_csv(os, values);
  std::istringstream is(os.str());
  EXPECT_EQ(rmtlab::read_values_csv(is), values);
}

TEST(Csv, AcceptsCrlfLineEndings) {
  std::istringstream is("bin_center,density\r\n0.5,1.25\r\n");
  const auto t = rmtlab::read_histogram_csv(is);
  ASSERT_EQ(t.centers.size(), 1u);
  EXPECT_EQ(t.densities[0], 1.25);
}

std::size_t error_line(const std::string& text) {
  std::istringstream is(text);
  try {
    rmtlab::read_histogram_csv(is, "input.csv");
  } catch (const rmtlab::CsvError& e) {
    EXPECT_NE(std::string(e.what()).find("input.csv:" + std::to_string(e.line())), std::string::npos);
    return e.line();
  }
  ADD_FAILURE() << "no error for:\n" << text;
  return 0;
}

TEST(Csv, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line(""), 1u);
  EXPECT_EQ(error_line("x,y\n0,1\n"), 1u);
  EXPECT_EQ(error_line("bin_center,density\n0.1,0.2\n0.3,abc\n"), 3u);
  EXPECT_EQ(error_line("bin_center,density\n0.1,0.2,0.3\n"), 2u);
  EXPECT_EQ(error_line("bin_center,density\n0.1,0.2\n0.2,\n"), 3u);
  EXPECT_EQ(error_line("bin_center,density\n0.1,2x\n"), 2u);
  EXPECT_EQ(error_line("bin_center,density\n"), 1u);
}

TEST(Csv, ValuesErrors) {
  std::istringstream bad_header("values\n1\n");
  EXPECT_THROW(rmtlab::read_values_csv(bad_header), rmtlab::CsvError);
  std::istringstream bad_row("value\n1\nfoo\n");
  try {
    rmtlab::read_values_csv(bad_row);
    FAIL();
  } catch (const rmtlab::CsvError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Files, WriteCreatesDirectoriesAndReadsBack) {
  const fs::path dir = fs::temp_directory_path() / "rmtlab_io_test";
  fs::remove_all(dir);
  const auto h = sample_histogram();
  rmtlab::write_csv_file(dir / "nested" / "h.csv", [&](std::ostream& os) { rmtlab::write_histogram_csv(os, h); });
  const auto t = rmtlab::read_histogram_csv(dir / "nested" / "h.csv");
  EXPECT_EQ(t.densities, h.density);
  EXPECT_THROW(rmtlab::read_histogram_csv(dir / "missing.csv"), std::runtime_error);
  fs::remove_all(dir);
}

TEST(Json, SpecAndFitFields) {
  rmtlab::EnsembleSpec spec;
  spec.kind = rmtlab::EnsembleKind::Umm;
  spec.n_dim = 256;
  spec.s = 0.7;
  spec.master_seed = 9;
  const auto js = rmtlab::to_json(spec);
  EXPECT_EQ(js["ensemble"], "umm");
  EXPECT_EQ(js["n"], 256);
  EXPECT_EQ(js["seed"], 9);
  EXPECT_FALSE(js.contains("profile"));

  rmtlab::FitResult fit;
  fit.lambda = 1.0;
  fit.xi = 0.5;
  fit.objective = 0.04;
  fit.bins_used = 4;
  fit.density_floor = 0.01;
  const auto jf = rmtlab::to_json(fit);
  for (const char* key : {"lambda", "xi", "alpha", "delta", "residual_rms", "protocol"}) EXPECT_TRUE(jf.contains(key));
  EXPECT_DOUBLE_EQ(jf["residual_rms"].get<double>(), 0.1);
  EXPECT_EQ(jf["protocol"]["density_floor"], 0.01);
}

TEST(Json, ProvenanceNamesGenerator) {
  const auto p = rmtlab::provenance();
  EXPECT_EQ(p["code_version"], rmtlab::kVersion);
  EXPECT_EQ(p["rng"], rmtlab::kRngName);
}

}  // namespace
