#pragma once

// Acceptance suite shared by the test binary and `icaprep check`.

#include <cstdint>
#include <string>
#include <vector>

#include "icaprep/matrix.hpp"

namespace icaprep::acceptance {

// Pinned reference figures and tolerances.
inline constexpr std::int64_t kPeriodCycles = 6144;
inline constexpr std::int64_t kTotalLatencyCycles = 15237;
inline constexpr std::int64_t kPrepLatencyCycles = 10757;
inline constexpr double kLatencyBand = 0.05;
inline constexpr std::int64_t kEvdCycles = 4480;
inline constexpr std::int64_t kNaiveIdleCycles = 40;
inline constexpr double kClockHz = 250e6;
inline constexpr const char* kThroughputDisplay = "40.7k";
inline constexpr double kOracleWhitenessTol = 1e-8;
inline constexpr double kOracleConvergedOffNorm = 1e-12;

struct Options {
  int accuracy_scenarios = 100;
  int mma_cases = 10000;
  int jacobi_matrices = 100;
  int whiteness_scenarios = 20;
  std::uint64_t seed = 1;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

CriterionResult criterion_period(const Options& opt);
CriterionResult criterion_latency(const Options& opt);
CriterionResult criterion_evd_cycles(const Options& opt);
CriterionResult criterion_throughput(const Options& opt);
CriterionResult criterion_mma(const Options& opt);
CriterionResult criterion_accuracy(const Options& opt);
CriterionResult criterion_jacobi(const Options& opt);
CriterionResult criterion_orderings(const Options& opt);
CriterionResult criterion_whiteness(const Options& opt);

// Criteria 1-9 in order.
std::vector<CriterionResult> run_all(const Options& opt = {});
CriterionResult run_criterion(int id, const Options& opt = {});

// "[PASS] 1 covariance period: ..."
std::string format_line(const CriterionResult& r);

// Straightforward triple-loop X·Y^H with the datapath's arithmetic: each
// product rounded half-even to the format, the conjugate taken with
// saturating negation, exact integer sums, one rounding shift and
// saturation at the end.
CFixMatrix naive_mma(const CFixMatrix& x, const CFixMatrix& y, int output_shift);

}  // namespace icaprep::acceptance
