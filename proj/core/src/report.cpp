#include "icaprep/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include "json.hpp"
#include <sstream>

#include "icaprep/errors.hpp"
#include "icaprep/signal_io.hpp"

namespace icaprep {
namespace {

using ojson = nlohmann::ordered_json;

std::string fmt_double(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

CheckResult within(std::string name, double value, double tol, const char* unit) {
  return {std::move(name), value <= tol,
          fmt_double(value, 3) + " " + unit + " (limit " + fmt_double(tol, 1) + ")"};
}

ojson phase_json(const Phase& p) {
  return ojson{{"name", p.name}, {"matrix", p.matrix}, {"start", p.start}, {"end", p.end}, {"resources", p.resources}};
}

}  // namespace

EvdCycleModel RunConfig::evd_model() const {
  EvdCycleModel model;
  model.sweeps = evd_sweeps;
  model.issue_interval = issue_interval;
  return model;
}

void RunConfig::validate() const {
  format().validate();
  if (n < 2 || n % 2 != 0) throw ConfigError("N must be even and >= 2 (got " + std::to_string(n) + ")");
  if (n > 0xffff) throw ConfigError("N too large");
  if (m < 2 || !is_power_of_two(static_cast<std::int64_t>(m))) {
    throw ConfigError("M must be a power of two >= 2 (got " + std::to_string(m) + ")");
  }
  if (m < n) throw ConfigError("M must be >= N");
  if (cordic_iters < 1 || cordic_iters > 32) throw ConfigError("cordic_iters must be in [1, 32]");
  if (evd_sweeps < 1) throw ConfigError("evd_sweeps must be >= 1");
  if (issue_interval < 1) throw ConfigError("issue_interval must be >= 1");
  if (!(clock_hz > 0.0) || !std::isfinite(clock_hz)) throw ConfigError("clock_hz must be positive");
  CordicConfig::make(cordic_iters, format(), guard_bits);
}

AccuracyReport measure_accuracy(const SignalMatrix& y, const PrepResult& prep, const EvdResult& evd) {
  const double lsb = y.format().lsb();
  const std::size_t n = y.n();
  AccuracyReport acc;

  const FloatMatrix c_ref = oracle_cov(oracle_center(to_float(y.data())));
  const FloatMatrix c_fix = to_float(prep.covariance);
  acc.covariance_max_err = max_abs_diff(c_fix, c_ref) / lsb;

  OracleEvd ref = oracle_evd(c_ref);
  std::vector<double> ref_eig = ref.eigenvalues;
  std::vector<double> fix_eig;
  for (const FixPoint& e : evd.eigenvalues) fix_eig.push_back(e.value());
  std::vector<double> fix_sorted = fix_eig;
  std::sort(ref_eig.begin(), ref_eig.end());
  std::sort(fix_sorted.begin(), fix_sorted.end());
  for (std::size_t k = 0; k < n; ++k) {
    acc.eigenvalue_max_err = std::max(acc.eigenvalue_max_err, std::abs(ref_eig[k] - fix_sorted[k]) / lsb);
  }

  const FloatMatrix e = to_float(evd.e);
  acc.unitarity_max_err = max_abs_diff(matmul(adjoint(e), e), float_identity(n)) / lsb;

  FloatMatrix d(n, n);
  for (std::size_t k = 0; k < n; ++k) d(k, k) = fix_eig[k];
  acc.reconstruction_max_err = max_abs_diff(matmul(matmul(e, d), adjoint(e)), c_fix) / lsb;

  try {
    const FloatMatrix w = whitening_matrix(fix_eig, e);
    acc.whiteness_max_err = max_abs_diff(matmul(matmul(w, c_ref), adjoint(w)), float_identity(n)) / lsb;
  } catch (const RankDeficiencyError&) {
    acc.whitening_defined = false;
    acc.whiteness_max_err = std::numeric_limits<double>::infinity();
  }
  acc.off_norm = evd.off_norm_lsb_per_sweep.empty() ? 0.0 : evd.off_norm_lsb_per_sweep.back();
  acc.saturations = prep.saturations + evd.saturations;
  return acc;
}

bool RunReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

RunReport run_pipeline(const RunConfig& config) {
  RunReport rep;
  rep.config = config;
  std::uint64_t input_saturations = 0;
  std::optional<SignalMatrix> loaded;
  if (config.input_path) {
    loaded = load_signals(*config.input_path);
    rep.config.n = loaded->n();
    rep.config.m = loaded->m();
    rep.config.word_length = loaded->format().word_length;
    rep.config.frac_bits = loaded->format().frac_bits;
  }
  const RunConfig& cfg = rep.config;
  cfg.validate();
  if (!loaded) {
    const BssScenario sc = generate_bss(cfg.n, cfg.m, cfg.seed, cfg.scenario);
    SaturationScope sat;
    loaded = quantize_signals(sc.y, cfg.format());
    input_saturations = sat.count();
  }
  const SignalMatrix& y = *loaded;

  const PrepResult prep = run_prep(y);
  const EvdResult evd = evd_run(prep.covariance, cfg.evd_model(), CordicConfig::make(cfg.cordic_iters, cfg.format(), cfg.guard_bits));

  rep.prep_ledger = prep.ledger;
  rep.evd_pipeline = evd.pipeline;
  rep.prep_latency = prep.ledger.latency;
  rep.prep_period = prep.ledger.period;
  rep.evd_cycles = evd.ledger.latency;
  rep.total_latency = rep.prep_latency + rep.evd_cycles;
  // The EVD of matrix k overlaps the covariance of matrix k+1.
  rep.period = std::max(rep.prep_period, rep.evd_cycles);
  rep.throughput_matrices_per_sec = cfg.clock_hz / static_cast<double>(rep.period);
  rep.micro_matrices_per_cycle = 1e6 / static_cast<double>(rep.period);
  for (const FixPoint& e : evd.eigenvalues) rep.eigenvalues.push_back(e.value());
  rep.accuracy = measure_accuracy(y, prep, evd);
  rep.accuracy.saturations += input_saturations;

  const AccuracyReport& a = rep.accuracy;
  rep.checks.push_back(within("covariance_within_4_lsb", a.covariance_max_err, kTolCovarianceLsb, "LSB"));
  rep.checks.push_back(within("eigenvalues_within_8_lsb", a.eigenvalue_max_err, kTolEigenLsb, "LSB"));
  rep.checks.push_back(within("unitarity_within_8_lsb", a.unitarity_max_err, kTolUnitarityLsb, "LSB"));
  rep.checks.push_back(within("reconstruction_within_16_lsb", a.reconstruction_max_err, kTolReconstructionLsb, "LSB"));
  rep.checks.push_back(within("whiteness_within_10_lsb", a.whiteness_max_err, kTolWhitenessLsb, "LSB"));
  rep.checks.push_back(within("off_norm_within_n_tau", a.off_norm, kTolOffDiagLsb * static_cast<double>(cfg.n), "LSB"));
  if (!cfg.input_path) {
    rep.checks.push_back({"no_saturation", a.saturations == 0, std::to_string(a.saturations) + " events"});
  }
  if (cfg.n >= 8) {
    const std::int64_t want =
        covariance_period_formula(static_cast<std::int64_t>(cfg.n), static_cast<std::int64_t>(cfg.m));
    rep.checks.push_back({"period_formula", rep.prep_period == want,
                          std::to_string(rep.prep_period) + " vs " + std::to_string(want) + " cycles"});
  }
  return rep;
}

std::string format_kilo(double value) { return fmt_double(value / 1000.0, 1) + "k"; }

std::string report_to_json(const RunReport& r) {
  const RunConfig& c = r.config;
  ojson j;
  j["schema"] = 1;
  j["config"] = ojson{{"N", c.n},
                      {"M", c.m},
                      {"word_length", c.word_length},
                      {"frac_bits", c.frac_bits},
                      {"cordic_iters", c.cordic_iters},
                      {"guard_bits", c.guard_bits},
                      {"evd_sweeps", c.evd_sweeps},
                      {"issue_interval", c.issue_interval},
                      {"clock_hz", c.clock_hz},
                      {"seed", c.seed},
                      {"scenario", std::string(to_string(c.scenario))},
                      {"input_path", c.input_path ? ojson(*c.input_path) : ojson(nullptr)}};
  j["cycles"] = ojson{{"prep_latency", r.prep_latency},
                      {"prep_period", r.prep_period},
                      {"evd_cycles", r.evd_cycles},
                      {"evd_stall_cycles", r.evd_pipeline.stall_cycles},
                      {"evd_drain_cycles", r.evd_pipeline.drain_cycles},
                      {"total_latency", r.total_latency},
                      {"period", r.period}};
  j["throughput"] = ojson{{"clock_hz", c.clock_hz},
                          {"period_cycles", r.period},
                          {"exact", fmt_double(c.clock_hz, 0) + "/" + std::to_string(r.period)},
                          {"matrices_per_sec", r.throughput_matrices_per_sec},
                          {"display", format_kilo(r.throughput_matrices_per_sec) + "Matrices/s"},
                          {"micro_matrices_per_cycle", r.micro_matrices_per_cycle}};
  const AccuracyReport& a = r.accuracy;
  j["accuracy_lsb"] = ojson{{"covariance_max_err", a.covariance_max_err},
                            {"eigenvalue_max_err", a.eigenvalue_max_err},
                            {"unitarity_max_err", a.unitarity_max_err},
                            {"reconstruction_max_err", a.reconstruction_max_err},
                            {"whiteness_max_err", a.whitening_defined ? ojson(a.whiteness_max_err) : ojson(nullptr)},
                            {"off_norm", a.off_norm},
                            {"saturations", a.saturations}};
  j["eigenvalues"] = r.eigenvalues;
  ojson checks = ojson::array();
  for (const CheckResult& ch : r.checks) checks.push_back({{"name", ch.name}, {"passed", ch.passed}, {"detail", ch.detail}});
  j["checks"] = checks;
  j["passed"] = r.passed();
  ojson prep_phases = ojson::array();
  for (const Phase& p : r.prep_ledger.phases) prep_phases.push_back(phase_json(p));
  ojson evd_phases = ojson::array();
  for (const Phase& p : r.evd_pipeline.orderings) evd_phases.push_back(phase_json(p));
  j["ledger"] = ojson{{"prep", prep_phases}, {"evd", evd_phases}};
  return j.dump(2) + "\n";
}

std::string report_summary(const RunReport& r) {
  std::ostringstream os;
  const RunConfig& c = r.config;
  os << "N=" << c.n << " M=" << c.m << " Q(" << c.word_length << "," << c.frac_bits << ") seed=" << c.seed << "\n";
  os << "  centering+covariance latency " << r.prep_latency << " cycles, period " << r.prep_period << "\n";
  os << "  EVD " << r.evd_cycles << " cycles (stall " << r.evd_pipeline.stall_cycles << ")\n";
  os << "  total latency " << r.total_latency << " cycles (" << fmt_double(static_cast<double>(r.total_latency) / c.clock_hz * 1e6, 2)
     << " us), throughput " << format_kilo(r.throughput_matrices_per_sec) << " matrices/s\n";
  for (const CheckResult& ch : r.checks) {
    os << "  " << (ch.passed ? "PASS " : "FAIL ") << ch.name << ": " << ch.detail << "\n";
  }
  return os.str();
}

std::string sweep_csv(const std::string& axis, const std::vector<std::string>& values,
                      const std::vector<RunReport>& reports) {
  std::ostringstream os;
  os << axis
     << ",total_latency,prep_period,period,throughput,cov_err,eig_err,unitarity_err,recon_err,whiteness_err,passed\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const RunReport& r = reports[i];
    const double lsb = r.config.format().lsb();
    const AccuracyReport& a = r.accuracy;
    char buf[256];
    std::snprintf(buf, sizeof buf, ",%lld,%lld,%lld,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%d\n",
                  static_cast<long long>(r.total_latency), static_cast<long long>(r.prep_period),
                  static_cast<long long>(r.period), r.throughput_matrices_per_sec, a.covariance_max_err * lsb,
                  a.eigenvalue_max_err * lsb, a.unitarity_max_err * lsb, a.reconstruction_max_err * lsb,
                  a.whiteness_max_err * lsb, r.passed() ? 1 : 0);
    os << values.at(i) << buf;
  }
  return os.str();
}

}  // namespace icaprep
