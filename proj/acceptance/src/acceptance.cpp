#include "icaprep/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "icaprep/ecmma.hpp"
#include "icaprep/errors.hpp"
#include "icaprep/evd.hpp"
#include "icaprep/oracle.hpp"
#include "icaprep/prep.hpp"
#include "icaprep/report.hpp"

namespace icaprep::acceptance {
namespace {

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

template <typename F>
CriterionResult timed(int id, std::string name, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult r{id, std::move(name), false, "", 0.0};
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

bool within_band(std::int64_t value, std::int64_t reference, double band) {
  return std::abs(static_cast<double>(value - reference)) <= band * static_cast<double>(reference);
}

double rel(std::int64_t value, std::int64_t reference) {
  return 100.0 * static_cast<double>(value - reference) / static_cast<double>(reference);
}

struct FixedRun {
  AccuracyReport acc;
};

FixedRun run_fixed_scenario(std::uint64_t seed) {
  const BssScenario sc = generate_bss(8, 512, seed, ScenarioKind::QpskSources);
  SaturationScope sat;
  const SignalMatrix y = quantize_signals(sc.y, kDefaultFormat);
  const PrepResult prep = run_prep(y);
  const EvdResult evd = evd_run(prep.covariance);
  FixedRun out{measure_accuracy(y, prep, evd)};
  out.acc.saturations = sat.count();
  return out;
}

FloatMatrix random_psd(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  FloatMatrix b(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) b(i, j) = {g(rng), g(rng)};
  }
  FloatMatrix a = matmul(b, adjoint(b));
  const OracleEvd e = oracle_evd(a);
  const double lmax = *std::max_element(e.eigenvalues.begin(), e.eigenvalues.end());
  std::uniform_real_distribution<double> u(0.5, 1.5);
  const double k = u(rng) / lmax;
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : a.row(i)) v *= k;
  }
  return a;
}

HermitianMatrix quantize_hermitian(const FloatMatrix& a, FixFormat f) {
  HermitianMatrix h(a.rows(), f);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    h.set(i, i, {quantize(a(i, i).real(), f), FixPoint::from_raw(0, f)});
    for (std::size_t j = i + 1; j < a.cols(); ++j) h.set(i, j, {quantize(a(i, j).real(), f), quantize(a(i, j).imag(), f)});
  }
  return h;
}

}  // namespace

CriterionResult criterion_period(const Options&) {
  return timed(1, "covariance period", [](CriterionResult& r) {
    const CycleLedger base = prep_schedule(8, 512, 4);
    int mismatches = 0;
    int cases = 0;
    for (std::size_t n : {8, 10, 12, 16}) {
      for (std::size_t m = 64; m <= 1024; m *= 2, ++cases) {
        const CycleLedger l = prep_schedule(n, m, 4);
        if (l.period != covariance_period_formula(static_cast<std::int64_t>(n), static_cast<std::int64_t>(m)) ||
            !l.resources_exclusive()) {
          ++mismatches;
        }
      }
    }
    r.passed = base.period == kPeriodCycles && mismatches == 0;
    r.detail = "N=8 M=512 period " + std::to_string(base.period) + " (expected " + std::to_string(kPeriodCycles) +
               "); formula mismatches " + std::to_string(mismatches) + "/" + std::to_string(cases);
  });
}

CriterionResult criterion_latency(const Options& opt) {
  return timed(2, "end-to-end latency", [&](CriterionResult& r) {
    RunConfig cfg;
    cfg.seed = opt.seed;
    const RunReport rep = run_pipeline(cfg);
    const bool total_ok = within_band(rep.total_latency, kTotalLatencyCycles, kLatencyBand);
    const bool prep_ok = within_band(rep.prep_latency, kPrepLatencyCycles, kLatencyBand);
    r.passed = total_ok && prep_ok;
    r.detail = "total " + std::to_string(rep.total_latency) + " vs " + std::to_string(kTotalLatencyCycles) +
               fmt(" (%+.2f%%)", rel(rep.total_latency, kTotalLatencyCycles)) + ", centering+covariance " +
               std::to_string(rep.prep_latency) + " vs " + std::to_string(kPrepLatencyCycles) +
               fmt(" (%+.2f%%), band +-%.0f%%", rel(rep.prep_latency, kPrepLatencyCycles), kLatencyBand * 100);
  });
}

CriterionResult criterion_evd_cycles(const Options&) {
  return timed(3, "EVD cycle calibration", [](CriterionResult& r) {
    const EvdCycleModel model;
    const PipelineStats hf = simulate_evd_pipeline(8, model, IssuePolicy::HazardFree);
    const PipelineStats naive = simulate_evd_pipeline(8, model, IssuePolicy::NaiveBarrier);
    r.passed = hf.total_cycles == kEvdCycles && evd_cycle_formula(8, model) == kEvdCycles && hf.stall_cycles == 0 &&
               hf.max_boundary_idle == 0 && naive.max_boundary_idle == kNaiveIdleCycles;
    r.detail = "EVD " + std::to_string(hf.total_cycles) + " cycles (expected " + std::to_string(kEvdCycles) +
               "); idle per ordering boundary " + std::to_string(hf.max_boundary_idle) + " hazard-free vs " +
               std::to_string(naive.max_boundary_idle) + " naive";
  });
}

CriterionResult criterion_throughput(const Options& opt) {
  return timed(4, "throughput identity", [&](CriterionResult& r) {
    RunConfig cfg;
    cfg.seed = opt.seed;
    cfg.clock_hz = kClockHz;
    const RunReport rep = run_pipeline(cfg);
    const double expected = kClockHz / static_cast<double>(rep.period);
    const std::string shown = format_kilo(rep.throughput_matrices_per_sec);
    r.passed = rep.period == kPeriodCycles && rep.throughput_matrices_per_sec == expected && shown == kThroughputDisplay;
    r.detail = fmt("%.1f matrices/s = %.0f / ", rep.throughput_matrices_per_sec, kClockHz) + std::to_string(rep.period) +
               ", shown " + shown + " (expected " + kThroughputDisplay + ")";
  });
}

CriterionResult criterion_mma(const Options& opt) {
  return timed(5, "MMA equivalence and cost", [&](CriterionResult& r) {
    std::mt19937_64 rng(opt.seed);
    std::uniform_int_distribution<int> pick_m(1, 4);
    std::uniform_int_distribution<int> pick_n(1, 64);
    std::uniform_int_distribution<int> pick_raw(static_cast<int>(kDefaultFormat.min_raw()),
                                                static_cast<int>(kDefaultFormat.max_raw()));
    std::uniform_int_distribution<int> pick_small(-64, 64);
    std::uniform_int_distribution<int> pick_shift(0, 6);
    int mismatches = 0;
    int bad_cycles = 0;
    for (int c = 0; c < opt.mma_cases; ++c) {
      const int m = pick_m(rng);
      const int n = pick_n(rng);
      // Alternate full-range operands (heavy saturation) with small ones.
      const bool full = c % 2 == 0;
      CFixMatrix x = make_cfix_matrix(static_cast<std::size_t>(m), static_cast<std::size_t>(n), kDefaultFormat);
      CFixMatrix y = x;
      for (CFixMatrix* mat : {&x, &y}) {
        for (std::size_t i = 0; i < mat->rows(); ++i) {
          for (auto& z : mat->row(i)) {
            z = full ? CFix::from_raw(pick_raw(rng), pick_raw(rng), kDefaultFormat)
                     : CFix::from_raw(pick_small(rng), pick_small(rng), kDefaultFormat);
          }
        }
      }
      const int shift = pick_shift(rng);
      const EcmmaResult res = ecmma_run(x, y, {m, n, kDefaultFormat, shift});
      if (!(res.product == naive_mma(x, y, shift))) ++mismatches;
      if (res.cycles != static_cast<std::int64_t>(m) * n) ++bad_cycles;
    }
    int census_bad = 0;
    for (int m = 1; m <= 16; ++m) {
      const EcmmaConfig cfg{m, 64, kDefaultFormat, 0};
      const std::int64_t mm = m;
      if (!(ecmma_resource_census(cfg) == ResourceCensus{2 * mm, 2 * mm, 4 * mm, 2 * mm * mm + 2 * mm, mm * 64})) ++census_bad;
      if (!(baseline_mma_resource_census(cfg) ==
            ResourceCensus{2 * mm * mm, 2 * mm * mm, 0, 2 * mm * mm + 2 * mm, mm * 64})) {
        ++census_bad;
      }
    }
    r.passed = mismatches == 0 && bad_cycles == 0 && census_bad == 0;
    r.detail = std::to_string(opt.mma_cases) + " random cases: " + std::to_string(mismatches) + " mismatches, " +
               std::to_string(bad_cycles) + " cycle-count errors; census mismatches " + std::to_string(census_bad);
  });
}

CriterionResult criterion_accuracy(const Options& opt) {
  return timed(6, "numerical accuracy", [&](CriterionResult& r) {
    AccuracyReport worst;
    std::uint64_t saturations = 0;
    for (int s = 0; s < opt.accuracy_scenarios; ++s) {
      const FixedRun run = run_fixed_scenario(opt.seed + static_cast<std::uint64_t>(s));
      const AccuracyReport& a = run.acc;
      worst.covariance_max_err = std::max(worst.covariance_max_err, a.covariance_max_err);
      worst.eigenvalue_max_err = std::max(worst.eigenvalue_max_err, a.eigenvalue_max_err);
      worst.unitarity_max_err = std::max(worst.unitarity_max_err, a.unitarity_max_err);
      worst.reconstruction_max_err = std::max(worst.reconstruction_max_err, a.reconstruction_max_err);
      saturations += a.saturations;
    }
    r.passed = worst.covariance_max_err <= kTolCovarianceLsb && worst.eigenvalue_max_err <= kTolEigenLsb &&
               worst.unitarity_max_err <= kTolUnitarityLsb && worst.reconstruction_max_err <= kTolReconstructionLsb &&
               saturations == 0;
    r.detail = std::to_string(opt.accuracy_scenarios) + " scenarios, worst LSB: " +
               fmt("covariance %.2f/%.0f, eigenvalues %.2f/%.0f, ", worst.covariance_max_err, kTolCovarianceLsb,
                   worst.eigenvalue_max_err, kTolEigenLsb) +
               fmt("E^H E %.2f/%.0f, reconstruction %.2f/%.0f, ", worst.unitarity_max_err, kTolUnitarityLsb,
                   worst.reconstruction_max_err, kTolReconstructionLsb) +
               "saturations " + std::to_string(saturations);
  });
}

CriterionResult criterion_jacobi(const Options& opt) {
  return timed(7, "Jacobi convergence", [&](CriterionResult& r) {
    std::mt19937_64 rng(opt.seed);
    int non_monotone = 0;
    int fixed_bad = 0;
    int max_sweeps = 0;
    double worst_fixed = 0.0;
    const double limit = 8 * kTolOffDiagLsb;
    for (int t = 0; t < opt.jacobi_matrices; ++t) {
      const FloatMatrix a = random_psd(8, rng);
      const OracleEvd e = oracle_evd(a);
      const double threshold = kOracleConvergedOffNorm * std::max(1.0, frobenius(a));
      for (std::size_t k = 0; k + 1 < e.off_norm_trace.size(); ++k) {
        if (e.off_norm_trace[k] >= threshold && !(e.off_norm_trace[k + 1] < e.off_norm_trace[k])) ++non_monotone;
      }
      if (!(e.off_norm_trace.back() < threshold)) ++non_monotone;
      max_sweeps = std::max(max_sweeps, e.sweeps);
      const EvdResult fixed = evd_run(quantize_hermitian(a, kDefaultFormat));
      const double off = fixed.off_norm_lsb_per_sweep.back();
      worst_fixed = std::max(worst_fixed, off);
      if (off > limit) ++fixed_bad;
    }
    r.passed = non_monotone == 0 && fixed_bad == 0;
    r.detail = std::to_string(opt.jacobi_matrices) + " matrices: oracle non-decreasing steps " +
               std::to_string(non_monotone) + " (max " + std::to_string(max_sweeps) + " sweeps); " +
               fmt("fixed-point off-norm worst %.2f LSB (limit %.0f)", worst_fixed, limit);
  });
}

CriterionResult criterion_orderings(const Options&) {
  return timed(8, "ordering combinatorics", [](CriterionResult& r) {
    int bad = 0;
    for (std::size_t n = 2; n <= 16; n += 2) {
      const std::vector<Ordering> ords = parallel_ordering(n);
      std::set<std::pair<int, int>> seen;
      bool ok = ords.size() == n - 1;
      for (const Ordering& o : ords) {
        std::set<int> used;
        ok = ok && o.size() == n / 2;
        for (const auto& [i, j] : o) {
          ok = ok && i < j && j < static_cast<int>(n) && used.insert(i).second && used.insert(j).second;
          ok = ok && seen.insert({i, j}).second;
        }
      }
      ok = ok && seen.size() == n * (n - 1) / 2;
      if (!ok) ++bad;
    }
    r.passed = bad == 0;
    r.detail = "even N in [2, 16]: " + std::to_string(bad) + " sizes violate exact pair coverage";
  });
}

CriterionResult criterion_whiteness(const Options& opt) {
  return timed(9, "whiteness", [&](CriterionResult& r) {
    double worst_oracle = 0.0;
    for (ScenarioKind kind : {ScenarioKind::QpskSources, ScenarioKind::GaussianMixCheck, ScenarioKind::TwoTone}) {
      for (int s = 0; s < opt.whiteness_scenarios; ++s) {
        const BssScenario sc = generate_bss(8, 512, opt.seed + static_cast<std::uint64_t>(s), kind);
        const FloatMatrix yb = oracle_center(sc.y);
        const OracleEvd e = oracle_evd(oracle_cov(yb));
        const FloatMatrix z = oracle_whiten(yb, e.eigenvalues, e.eigenvectors);
        worst_oracle = std::max(worst_oracle, max_abs_diff(oracle_cov(z), float_identity(8)));
      }
    }
    double worst_fixed = 0.0;
    for (int s = 0; s < opt.whiteness_scenarios; ++s) {
      worst_fixed = std::max(worst_fixed, run_fixed_scenario(opt.seed + static_cast<std::uint64_t>(s)).acc.whiteness_max_err);
    }
    r.passed = worst_oracle <= kOracleWhitenessTol && worst_fixed <= kTolWhitenessLsb;
    r.detail = fmt("oracle worst %.2e (limit %.0e) over 3 scenario kinds; fixed-point worst %.2f LSB (limit %.0f)",
                   worst_oracle, kOracleWhitenessTol, worst_fixed, kTolWhitenessLsb);
  });
}

CriterionResult run_criterion(int id, const Options& opt) {
  switch (id) {
    case 1:
      return criterion_period(opt);
    case 2:
      return criterion_latency(opt);
    case 3:
      return criterion_evd_cycles(opt);
    case 4:
      return criterion_throughput(opt);
    case 5:
      return criterion_mma(opt);
    case 6:
      return criterion_accuracy(opt);
    case 7:
      return criterion_jacobi(opt);
    case 8:
      return criterion_orderings(opt);
    case 9:
      return criterion_whiteness(opt);
    default:
      throw ConfigError("no acceptance criterion " + std::to_string(id));
  }
}

std::vector<CriterionResult> run_all(const Options& opt) {
  std::vector<CriterionResult> out;
  for (int id = 1; id <= 9; ++id) out.push_back(run_criterion(id, opt));
  return out;
}

std::string format_line(const CriterionResult& r) {
  return std::string(r.passed ? "[PASS] " : "[FAIL] ") + std::to_string(r.id) + " " + r.name + ": " + r.detail +
         fmt(" (%.2fs)", r.seconds);
}

}  // namespace icaprep::acceptance
