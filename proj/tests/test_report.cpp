#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <map>

#include "icaprep/errors.hpp"
#include "icaprep/report.hpp"
#include "icaprep/signal_io.hpp"
#include "json.hpp"

using namespace icaprep;

namespace {

const RunReport& default_report() {
  static const RunReport r = run_pipeline(RunConfig{});
  return r;
}

// Mean absolute error over seeds 1..10, converted from LSB to real units.
std::map<int, std::pair<double, double>> mean_errors(int RunConfig::*field, const std::vector<int>& values) {
  std::map<int, std::pair<double, double>> out;
  for (int v : values) {
    double eig = 0.0;
    double recon = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      RunConfig c;
      c.*field = v;
      c.seed = seed;
      const RunReport r = run_pipeline(c);
      const double lsb = c.format().lsb();
      eig += r.accuracy.eigenvalue_max_err * lsb / 10;
      recon += r.accuracy.reconstruction_max_err * lsb / 10;
    }
    out[v] = {eig, recon};
  }
  return out;
}

}  // namespace

TEST(RunPipeline, DefaultConfigHeadlineNumbers) {
  const RunReport& r = default_report();
  EXPECT_EQ(r.prep_period, 6144);
  EXPECT_EQ(r.period, 6144);
  EXPECT_EQ(r.evd_cycles, 4480);
  EXPECT_NEAR(static_cast<double>(r.total_latency), 15237.0, 0.05 * 15237.0);
  EXPECT_NEAR(static_cast<double>(r.prep_latency), 10757.0, 0.05 * 10757.0);
  EXPECT_DOUBLE_EQ(r.throughput_matrices_per_sec, 250e6 / 6144);
  EXPECT_EQ(format_kilo(r.throughput_matrices_per_sec), "40.7k");
  EXPECT_EQ(r.evd_pipeline.stall_cycles, 0);
  EXPECT_TRUE(r.passed()) << report_summary(r);
  EXPECT_EQ(r.eigenvalues.size(), 8u);
}

TEST(RunPipeline, SmallConfigPassesOracleChecks) {
  RunConfig c;
  c.n = 4;
  c.m = 64;
  const RunReport r = run_pipeline(c);
  EXPECT_TRUE(r.passed()) << report_summary(r);
  EXPECT_GT(r.total_latency, 0);
  for (const CheckResult& ch : r.checks) EXPECT_NE(ch.name, "period_formula");
}

TEST(RunPipeline, AllScenarioKindsPass) {
  for (ScenarioKind k : {ScenarioKind::QpskSources, ScenarioKind::TwoTone, ScenarioKind::GaussianMixCheck}) {
    RunConfig c;
    c.scenario = k;
    const RunReport r = run_pipeline(c);
    EXPECT_LE(r.accuracy.covariance_max_err, kTolCovarianceLsb) << to_string(k);
    EXPECT_LE(r.accuracy.eigenvalue_max_err, kTolEigenLsb) << to_string(k);
  }
}

TEST(RunPipeline, SweepOverSamplesScalesPeriod) {
  const std::map<std::size_t, std::int64_t> expect = {{64, 768}, {128, 1536}, {256, 3072}, {512, 6144}};
  for (const auto& [m, period] : expect) {
    RunConfig c;
    c.m = m;
    EXPECT_EQ(run_pipeline(c).prep_period, period) << "M=" << m;
  }
}

TEST(RunPipeline, EigenvalueErrorNonIncreasingInFracBits) {
  const auto e = mean_errors(&RunConfig::frac_bits, {6, 7, 8});
  EXPECT_LE(e.at(7).first, e.at(6).first);
  EXPECT_LE(e.at(8).first, e.at(7).first);
}

TEST(RunPipeline, ReconstructionPlateausInCordicIterations) {
  const std::vector<int> iters = {6, 7, 8, 9, 10, 11, 12};
  const auto e = mean_errors(&RunConfig::cordic_iters, iters);
  double floor = 1e9;
  for (int k : iters) floor = std::min(floor, e.at(k).second);
  const double band = floor + 2 * kDefaultFormat.lsb();
  bool on_plateau = false;
  for (std::size_t i = 0; i < iters.size(); ++i) {
    const double err = e.at(iters[i]).second;
    if (on_plateau) {
      EXPECT_LE(err, band) << "iters " << iters[i];
    } else if (i > 0) {
      EXPECT_LE(err, e.at(iters[i - 1]).second) << "iters " << iters[i];
    }
    on_plateau = on_plateau || err <= band;
  }
  EXPECT_TRUE(on_plateau);
  EXPECT_GT(e.at(6).second, band);
}

TEST(RunPipeline, InputFileOverridesShape) {
  const auto path = std::filesystem::temp_directory_path() / "icaprep_report_input.raw";
  const BssScenario s = generate_bss(4, 128, 5, ScenarioKind::QpskSources);
  save_signals(quantize_signals(s.y, kDefaultFormat), path.string(), SignalFormat::Raw);
  RunConfig c;
  c.input_path = path.string();
  const RunReport r = run_pipeline(c);
  EXPECT_EQ(r.config.n, 4u);
  EXPECT_EQ(r.config.m, 128u);
  EXPECT_TRUE(r.passed()) << report_summary(r);
  for (const CheckResult& ch : r.checks) EXPECT_NE(ch.name, "no_saturation");
  std::filesystem::remove(path);
}

TEST(RunConfig, ValidationErrors) {
  auto invalid = [](auto mutate) {
    RunConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), ConfigError);
  };
  invalid([](RunConfig& c) { c.n = 7; });
  invalid([](RunConfig& c) { c.m = 500; });
  invalid([](RunConfig& c) { c.frac_bits = 10; });
  invalid([](RunConfig& c) { c.cordic_iters = 0; });
  invalid([](RunConfig& c) { c.evd_sweeps = 0; });
  invalid([](RunConfig& c) { c.issue_interval = 0; });
  invalid([](RunConfig& c) { c.clock_hz = 0; });
  EXPECT_NO_THROW(RunConfig{}.validate());
}

TEST(ReportJson, SchemaAndDeterminism) {
  const std::string a = report_to_json(default_report());
  const std::string b = report_to_json(run_pipeline(RunConfig{}));
  EXPECT_EQ(a, b);
  const auto j = nlohmann::json::parse(a);
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["cycles"]["period"], 6144);
  EXPECT_EQ(j["cycles"]["evd_cycles"], 4480);
  EXPECT_EQ(j["throughput"]["exact"], "250000000/6144");
  EXPECT_EQ(j["throughput"]["display"], "40.7kMatrices/s");
  EXPECT_EQ(j["config"]["N"], 8);
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_EQ(j["eigenvalues"].size(), 8u);
  EXPECT_FALSE(j["ledger"]["prep"].empty());
  EXPECT_EQ(j["ledger"]["evd"].size(), 140u);
}

TEST(ReportSummary, MentionsKeyFigures) {
  const std::string s = report_summary(default_report());
  EXPECT_NE(s.find("period 6144"), std::string::npos);
  EXPECT_NE(s.find("EVD 4480 cycles"), std::string::npos);
  EXPECT_NE(s.find("40.7k"), std::string::npos);
}

TEST(SweepCsv, OneRowPerValue) {
  const std::string csv = sweep_csv("seed", {"1"}, {default_report()});
  EXPECT_EQ(csv.rfind("seed,total_latency,", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
}

TEST(FormatKilo, Rounding) {
  EXPECT_EQ(format_kilo(40690.1), "40.7k");
  EXPECT_EQ(format_kilo(55803.6), "55.8k");
  EXPECT_EQ(format_kilo(999.0), "1.0k");
}
