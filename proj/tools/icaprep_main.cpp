// icaprep: run, sweep, generate and check the ICA preprocessor model.
//
// Exit codes: 0 success, 1 acceptance failure, 2 malformed input or config.

#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "icaprep/acceptance.hpp"
#include "icaprep/errors.hpp"
#include "icaprep/oracle.hpp"
#include "icaprep/report.hpp"
#include "icaprep/signal_io.hpp"

namespace {

using namespace icaprep;

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitBadInput = 2;

struct CliConfig {
  RunConfig run;
  std::string scenario = "qpsk_sources";
  std::string input;
  std::string output;
};

void add_run_flags(CLI::App* cmd, CliConfig& c) {
  cmd->add_option("-N,--signals", c.run.n, "Number of signals (even)")->capture_default_str();
  cmd->add_option("-M,--samples", c.run.m, "Samples per signal (power of two)")->capture_default_str();
  cmd->add_option("--word-length", c.run.word_length, "Fixed-point word length")->capture_default_str();
  cmd->add_option("--frac-bits", c.run.frac_bits, "Fixed-point fraction bits")->capture_default_str();
  cmd->add_option("--cordic-iters", c.run.cordic_iters, "CORDIC micro-rotations")->capture_default_str();
  cmd->add_option("--guard-bits", c.run.guard_bits, "CORDIC internal guard bits")->capture_default_str();
  cmd->add_option("--evd-sweeps", c.run.evd_sweeps, "Jacobi sweeps")->capture_default_str();
  cmd->add_option("--issue-interval", c.run.issue_interval, "EVD cycles per submatrix")->capture_default_str();
  cmd->add_option("--clock-hz", c.run.clock_hz, "Clock for throughput scaling")->capture_default_str();
  cmd->add_option("--seed", c.run.seed, "Scenario seed")->envname("ICAPREP_SEED")->capture_default_str();
  cmd->add_option("--scenario", c.scenario, "qpsk_sources | gaussian_mix_check | two_tone")->capture_default_str();
}

RunConfig finish(const CliConfig& c) {
  RunConfig r = c.run;
  r.scenario = parse_scenario_kind(c.scenario);
  if (!c.input.empty()) r.input_path = c.input;
  if (!c.output.empty()) r.output_path = c.output;
  return r;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

int cmd_run(const CliConfig& c) {
  const RunConfig cfg = finish(c);
  const RunReport rep = run_pipeline(cfg);
  std::cout << report_summary(rep);
  if (cfg.output_path) write_file(*cfg.output_path, report_to_json(rep));
  return rep.passed() ? kExitOk : kExitFailed;
}

void apply_axis(RunConfig& cfg, const std::string& axis, const std::string& value) {
  std::size_t used = 0;
  const long long v = std::stoll(value, &used);
  if (used != value.size()) throw ConfigError("sweep value '" + value + "' is not an integer");
  if (axis == "N") {
    cfg.n = static_cast<std::size_t>(v);
  } else if (axis == "M") {
    cfg.m = static_cast<std::size_t>(v);
  } else if (axis == "frac_bits") {
    cfg.frac_bits = static_cast<int>(v);
  } else if (axis == "word_length") {
    cfg.word_length = static_cast<int>(v);
  } else if (axis == "cordic_iters") {
    cfg.cordic_iters = static_cast<int>(v);
  } else if (axis == "guard_bits") {
    cfg.guard_bits = static_cast<int>(v);
  } else if (axis == "evd_sweeps") {
    cfg.evd_sweeps = static_cast<int>(v);
  } else if (axis == "issue_interval") {
    cfg.issue_interval = static_cast<int>(v);
  } else if (axis == "seed") {
    cfg.seed = static_cast<std::uint64_t>(v);
  } else {
    throw ConfigError("unknown sweep axis '" + axis + "'");
  }
}

int cmd_sweep(const CliConfig& c, const std::string& axis, const std::vector<std::string>& values, unsigned jobs) {
  const RunConfig base = finish(c);
  std::vector<RunConfig> configs;
  for (const std::string& v : values) {
    RunConfig cfg = base;
    cfg.output_path.reset();
    apply_axis(cfg, axis, v);
    cfg.validate();
    configs.push_back(cfg);
  }
  std::vector<RunReport> reports(configs.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < configs.size(); ++i) reports[i] = run_pipeline(configs[i]);
  } else {
    for (std::size_t start = 0; start < configs.size(); start += jobs) {
      std::vector<std::future<RunReport>> batch;
      for (std::size_t i = start; i < std::min(configs.size(), start + jobs); ++i) {
        batch.push_back(std::async(std::launch::async, run_pipeline, configs[i]));
      }
      for (std::size_t k = 0; k < batch.size(); ++k) reports[start + k] = batch[k].get();
    }
  }
  const std::string csv = sweep_csv(axis, values, reports);
  if (base.output_path) {
    write_file(*base.output_path, csv);
  } else {
    std::cout << csv;
  }
  for (const RunReport& r : reports) {
    if (!r.passed()) return kExitFailed;
  }
  return kExitOk;
}

int cmd_gen(const CliConfig& c, const std::string& format) {
  const RunConfig cfg = finish(c);
  cfg.validate();
  if (!cfg.output_path) throw ConfigError("gen needs --output");
  const SignalFormat f = format.empty() ? signal_format_from_path(*cfg.output_path)
                         : format == "csv" ? SignalFormat::Csv
                         : format == "raw" ? SignalFormat::Raw
                                           : throw ConfigError("unknown format '" + format + "'");
  const BssScenario sc = generate_bss(cfg.n, cfg.m, cfg.seed, cfg.scenario);
  save_signals(quantize_signals(sc.y, cfg.format()), *cfg.output_path, f);
  std::cout << "wrote " << cfg.n << "x" << cfg.m << " " << to_string(cfg.scenario) << " scenario to "
            << *cfg.output_path << "\n";
  return kExitOk;
}

int cmd_check(const acceptance::Options& opt, const std::vector<int>& only) {
  bool ok = true;
  std::vector<int> ids = only;
  if (ids.empty()) ids = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  for (int id : ids) {
    const acceptance::CriterionResult r = acceptance::run_criterion(id, opt);
    std::cout << acceptance::format_line(r) << std::endl;
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bit- and cycle-accurate model of a configurable ICA preprocessor"};
  app.require_subcommand(1);

  CliConfig run_cfg;
  CLI::App* run = app.add_subcommand("run", "Run one configuration and report cycles and accuracy");
  add_run_flags(run, run_cfg);
  run->add_option("-i,--input", run_cfg.input, "Signal file (.csv or .raw) instead of a generated scenario");
  run->add_option("-o,--output", run_cfg.output, "Write the JSON report here");

  CliConfig sweep_cfg;
  std::string axis;
  std::vector<std::string> values;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  CLI::App* sweep = app.add_subcommand("sweep", "Run a parameter sweep and emit a CSV summary");
  add_run_flags(sweep, sweep_cfg);
  sweep->add_option("--axis", axis, "N, M, frac_bits, word_length, cordic_iters, guard_bits, evd_sweeps, issue_interval or seed")
      ->required();
  sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');
  sweep->add_option("-j,--jobs", jobs, "Parallel runs")->capture_default_str();
  sweep->add_option("-o,--output", sweep_cfg.output, "Write the CSV here instead of stdout");

  CliConfig gen_cfg;
  std::string gen_format;
  CLI::App* gen = app.add_subcommand("gen", "Write a generated scenario as a signal file");
  add_run_flags(gen, gen_cfg);
  gen->add_option("-o,--output", gen_cfg.output, "Output file")->required();
  gen->add_option("--format", gen_format, "csv or raw (default: from extension)");

  acceptance::Options check_opt;
  std::vector<int> only;
  CLI::App* check = app.add_subcommand("check", "Run the acceptance suite");
  check->add_option("--seed", check_opt.seed, "Base seed")->envname("ICAPREP_SEED")->capture_default_str();
  check->add_option("--scenarios", check_opt.accuracy_scenarios, "Scenarios for the accuracy criterion")
      ->capture_default_str();
  check->add_option("--criterion", only, "Run only these criteria (1-9)")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (*run) return cmd_run(run_cfg);
    if (*sweep) return cmd_sweep(sweep_cfg, axis, values, jobs);
    if (*gen) return cmd_gen(gen_cfg, gen_format);
    if (*check) return cmd_check(check_opt, only);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  return kExitBadInput;
}
