#pragma once

// End-to-end run: scenario or file -> quantize -> centering/covariance ->
// EVD -> comparison with the double-precision reference.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "icaprep/cycle_ledger.hpp"
#include "icaprep/evd.hpp"
#include "icaprep/oracle.hpp"
#include "icaprep/prep.hpp"

namespace icaprep {

struct RunConfig {
  std::size_t n = 8;
  std::size_t m = 512;
  int word_length = 10;
  int frac_bits = 8;
  int cordic_iters = 10;
  int guard_bits = 8;
  int evd_sweeps = 20;
  int issue_interval = 2;
  double clock_hz = 250e6;
  std::uint64_t seed = 1;
  ScenarioKind scenario = ScenarioKind::QpskSources;
  std::optional<std::string> input_path;
  std::optional<std::string> output_path;

  FixFormat format() const { return {word_length, frac_bits}; }
  EvdCycleModel evd_model() const;
  // Throws ConfigError on the first invalid field.
  void validate() const;
};

// Per-component errors, in LSB of the run's format.
struct AccuracyReport {
  double covariance_max_err = 0.0;   // fixed Yc vs reference covariance
  double eigenvalue_max_err = 0.0;   // sorted fixed D vs reference eigenvalues
  double unitarity_max_err = 0.0;    // E^H E vs I
  double reconstruction_max_err = 0.0;  // E D E^H vs fixed Yc
  double whiteness_max_err = 0.0;    // W C W^H vs I, W from fixed D and E
  double off_norm = 0.0;             // off(D) Frobenius norm after the last sweep
  std::uint64_t saturations = 0;
  bool whitening_defined = true;     // false when the fixed spectrum is rank deficient
};

inline constexpr double kTolCovarianceLsb = 4.0;
inline constexpr double kTolEigenLsb = 8.0;
inline constexpr double kTolUnitarityLsb = 8.0;
inline constexpr double kTolReconstructionLsb = 16.0;
inline constexpr double kTolWhitenessLsb = 10.0;
inline constexpr double kTolOffDiagLsb = 4.0;

// Compares a fixed-point run on `y` against the double reference computed
// from the same quantized samples.
AccuracyReport measure_accuracy(const SignalMatrix& y, const PrepResult& prep, const EvdResult& evd);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunReport {
  RunConfig config;
  CycleLedger prep_ledger;
  PipelineStats evd_pipeline;
  std::int64_t prep_latency = 0;
  std::int64_t prep_period = 0;
  std::int64_t evd_cycles = 0;
  std::int64_t total_latency = 0;
  std::int64_t period = 0;
  double throughput_matrices_per_sec = 0.0;
  double micro_matrices_per_cycle = 0.0;
  std::vector<double> eigenvalues;  // fixed-point D, hardware order
  AccuracyReport accuracy;
  std::vector<CheckResult> checks;

  bool passed() const;
};

// Loads config.input_path or generates a scenario, then runs everything.
RunReport run_pipeline(const RunConfig& config);

// Throughput rounded to one decimal in thousands, e.g. "40.7k".
std::string format_kilo(double value);

std::string report_to_json(const RunReport& report);
std::string report_summary(const RunReport& report);

// One CSV row per report: value,latency,period,eig_err_abs,recon_err_abs,...
std::string sweep_csv(const std::string& axis, const std::vector<std::string>& values,
                      const std::vector<RunReport>& reports);

}  // namespace icaprep
