#include <benchmark/benchmark.h>

#include <random>

#include "icaprep/ecmma.hpp"
#include "icaprep/evd.hpp"
#include "icaprep/oracle.hpp"
#include "icaprep/prep.hpp"

using namespace icaprep;

namespace {

CFixMatrix random_block(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(-200, 200);
  CFixMatrix m = make_cfix_matrix(rows, cols, kDefaultFormat);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < cols; ++k) m(i, k) = CFix::from_raw(d(rng), d(rng), kDefaultFormat);
  }
  return m;
}

SignalMatrix scenario_signals(std::size_t n, std::size_t m) {
  return quantize_signals(generate_bss(n, m, 1, ScenarioKind::QpskSources).y, kDefaultFormat);
}

void BM_EcmmaRun(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const CFixMatrix x = random_block(2, n, 1);
  const CFixMatrix y = random_block(2, n, 2);
  const EcmmaConfig cfg{2, static_cast<int>(n), kDefaultFormat, log2_exact(static_cast<std::int64_t>(n))};
  for (auto _ : state) benchmark::DoNotOptimize(ecmma_run(x, y, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n));
}
BENCHMARK(BM_EcmmaRun)->Arg(64)->Arg(512);

void BM_Diagonalize2x2(benchmark::State& state) {
  const CordicConfig cfg = CordicConfig::make();
  CFixMatrix p = make_cfix_matrix(2, 2, kDefaultFormat);
  p(0, 0) = CFix::from_raw(180, 0, kDefaultFormat);
  p(1, 1) = CFix::from_raw(60, 0, kDefaultFormat);
  p(0, 1) = CFix::from_raw(40, -25, kDefaultFormat);
  p(1, 0) = CFix::from_raw(40, 25, kDefaultFormat);
  for (auto _ : state) benchmark::DoNotOptimize(diagonalize_2x2(p, cfg));
}
BENCHMARK(BM_Diagonalize2x2);

void BM_RunPrep(benchmark::State& state) {
  const SignalMatrix y = scenario_signals(8, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_prep(y));
}
BENCHMARK(BM_RunPrep)->Arg(64)->Arg(512);

void BM_EvdRun(benchmark::State& state) {
  const HermitianMatrix yc = run_prep(scenario_signals(8, 512)).covariance;
  for (auto _ : state) benchmark::DoNotOptimize(evd_run(yc));
}
BENCHMARK(BM_EvdRun);

void BM_EvdPipelineModel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(simulate_evd_pipeline(8, {}, IssuePolicy::HazardFree));
}
BENCHMARK(BM_EvdPipelineModel);

void BM_OracleEvd(benchmark::State& state) {
  const FloatMatrix c = oracle_cov(oracle_center(generate_bss(8, 512, 1, ScenarioKind::QpskSources).y));
  for (auto _ : state) benchmark::DoNotOptimize(oracle_evd(c));
}
BENCHMARK(BM_OracleEvd);

}  // namespace

BENCHMARK_MAIN();
