#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "icaprep/ecmma.hpp"
#include "icaprep/errors.hpp"
#include "icaprep/oracle.hpp"
#include "icaprep/prep.hpp"

using namespace icaprep;

namespace {

const double kLsb = kDefaultFormat.lsb();

std::vector<CFix> random_row(std::size_t m, std::mt19937_64& rng, int amp = 200) {
  std::uniform_int_distribution<int> d(-amp, amp);
  std::vector<CFix> row;
  for (std::size_t k = 0; k < m; ++k) row.push_back(CFix::from_raw(d(rng), d(rng), kDefaultFormat));
  return row;
}

SignalMatrix random_signals(std::size_t n, std::size_t m, std::uint64_t seed, int amp = 200) {
  std::mt19937_64 rng(seed);
  SignalMatrix y(n, m, kDefaultFormat);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = random_row(m, rng, amp);
    for (std::size_t k = 0; k < m; ++k) y(i, k) = row[k];
  }
  return y;
}

double value_err(const CFix& z, cdouble ref) {
  return std::max(std::abs(z.re.value() - ref.real()), std::abs(z.im.value() - ref.imag()));
}

cdouble float_dot_conj(std::span<const CFix> a, std::span<const CFix> b) {
  cdouble s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    s += cdouble(a[k].re.value(), a[k].im.value()) * std::conj(cdouble(b[k].re.value(), b[k].im.value()));
  }
  return s / static_cast<double>(a.size());
}

}  // namespace

TEST(SignalMatrix, RejectsBadShapes) {
  EXPECT_THROW(SignalMatrix(3, 8, kDefaultFormat), ConfigError);
  EXPECT_THROW(SignalMatrix(0, 8, kDefaultFormat), ConfigError);
  EXPECT_THROW(SignalMatrix(4, 12, kDefaultFormat), ConfigError);
  EXPECT_THROW(SignalMatrix(4, 1, kDefaultFormat), ConfigError);
  EXPECT_NO_THROW(SignalMatrix(2, 2, kDefaultFormat));
}

TEST(HermitianMatrix, LowerTriangleIsConjugate) {
  HermitianMatrix h(4, kDefaultFormat);
  h.set(0, 2, CFix::from_raw(10, -20, kDefaultFormat));
  EXPECT_EQ(h.get(2, 0), CFix::from_raw(10, 20, kDefaultFormat));
  h.set(3, 1, CFix::from_raw(5, 7, kDefaultFormat));
  EXPECT_EQ(h.get(1, 3), CFix::from_raw(5, -7, kDefaultFormat));
  EXPECT_THROW(h.set(1, 1, CFix::from_raw(5, 1, kDefaultFormat)), ContractViolation);
  EXPECT_THROW(h.set(1, 1, CFix::from_raw(-2, 0, kDefaultFormat)), ContractViolation);
  EXPECT_NO_THROW(h.set(1, 1, CFix::from_raw(-1, 0, kDefaultFormat)));
  EXPECT_THROW(h.get(4, 0), ContractViolation);
  const CFixMatrix full = h.to_full();
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(full(i, j), cfx_conj(full(j, i)));
  }
  EXPECT_EQ(HermitianMatrix::from_full(full), h);
}

TEST(HermitianMatrix, FromFullChecksSymmetry) {
  CFixMatrix full = make_cfix_matrix(2, 2, kDefaultFormat);
  full(0, 1) = CFix::from_raw(3, 4, kDefaultFormat);
  full(1, 0) = CFix::from_raw(3, -2, kDefaultFormat);
  EXPECT_THROW(HermitianMatrix::from_full(full), ContractViolation);
  full(1, 0) = CFix::from_raw(3, -5, kDefaultFormat);
  EXPECT_THROW(HermitianMatrix::from_full(full), ContractViolation);
  EXPECT_NO_THROW(HermitianMatrix::from_full(full, 1));
}

TEST(CenterPair, ConstantRow) {
  const CFix v = CFix::from_raw(77, -31, kDefaultFormat);
  const std::vector<CFix> row(64, v);
  const CenteredPair c = center_pair(row, row);
  EXPECT_EQ(c.mean_a, v);
  EXPECT_EQ(c.cycles, 128);
  for (const CFix& z : c.a) EXPECT_EQ(z, CFix::zero(kDefaultFormat));
}

TEST(CenterPair, ZeroMeanRowIsIdempotent) {
  std::mt19937_64 rng(41);
  auto row = random_row(32, rng);
  for (std::size_t k = 0; k < 16; ++k) row[k + 16] = {fx_neg(row[k].re), fx_neg(row[k].im)};
  const CenteredPair c = center_pair(row, row);
  for (std::size_t k = 0; k < row.size(); ++k) {
    EXPECT_LE(std::abs(c.a[k].re.raw() - row[k].re.raw()), 1);
    EXPECT_LE(std::abs(c.a[k].im.raw() - row[k].im.raw()), 1);
  }
}

TEST(CenterPair, RandomMatchesFloatOracle) {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 20; ++t) {
    const auto a = random_row(512, rng, 250);
    const auto b = random_row(512, rng, 250);
    const CenteredPair c = center_pair(a, b);
    cdouble mean = 0.0;
    for (const CFix& z : a) mean += cdouble(z.re.value(), z.im.value());
    mean /= 512.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const cdouble ref = cdouble(a[k].re.value(), a[k].im.value()) - mean;
      const CFix q{quantize(ref.real(), kDefaultFormat), quantize(ref.imag(), kDefaultFormat)};
      EXPECT_LE(std::abs(c.a[k].re.raw() - q.re.raw()), 1);
      EXPECT_LE(std::abs(c.a[k].im.raw() - q.im.raw()), 1);
    }
  }
}

TEST(CenterPair, Errors) {
  std::mt19937_64 rng(43);
  const auto a = random_row(12, rng);
  EXPECT_THROW(center_pair(a, a), ConfigError);
  const auto b = random_row(8, rng);
  EXPECT_THROW(center_pair(a, b), ContractViolation);
}

TEST(DscDiag, Examples) {
  const std::vector<CFix> zero(16, CFix::zero(kDefaultFormat));
  const DscDiag z = dsc_compute_diag(zero, zero);
  EXPECT_EQ(z.aa, CFix::zero(kDefaultFormat));
  EXPECT_EQ(z.cycles, 16);

  // Constant magnitude 0.75 with rotating phase.
  std::vector<CFix> ring;
  for (int k = 0; k < 64; ++k) {
    const double ph = 2 * 3.141592653589793 * k / 64;
    ring.push_back({quantize(0.75 * std::cos(ph), kDefaultFormat), quantize(0.75 * std::sin(ph), kDefaultFormat)});
  }
  const DscDiag r = dsc_compute_diag(ring, ring);
  EXPECT_NEAR(r.aa.re.value(), 0.5625, 2 * kLsb);
  EXPECT_EQ(r.aa.im.raw(), 0);
}

TEST(DscDiag, RandomMatchesFloatOracle) {
  std::mt19937_64 rng(44);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_row(256, rng, 250);
    const auto b = random_row(256, rng, 250);
    const DscDiag d = dsc_compute_diag(a, b);
    EXPECT_LE(value_err(d.aa, float_dot_conj(a, a)), 2 * kLsb);
    EXPECT_LE(value_err(d.bb, float_dot_conj(b, b)), 2 * kLsb);
    EXPECT_EQ(d.bb.im.raw(), 0);
  }
}

TEST(DscOffdiag, Examples) {
  std::mt19937_64 rng(45);
  auto a = random_row(32, rng);
  auto b = random_row(32, rng);
  for (std::size_t k = 0; k < 32; ++k) (k < 16 ? b[k] : a[k]) = CFix::zero(kDefaultFormat);
  EXPECT_LE(std::abs(dsc_compute_offdiag(a, b).ab.re.raw()), 1);
  EXPECT_LE(std::abs(dsc_compute_offdiag(a, b).ab.im.raw()), 1);

  const auto c = random_row(32, rng);
  const DscOffdiag self = dsc_compute_offdiag(c, c);
  const DscDiag diag = dsc_compute_diag(c, c);
  EXPECT_LE(std::abs(self.ab.re.raw() - diag.aa.re.raw()), 1);
  EXPECT_LE(std::abs(self.ab.im.raw()), 1);
  EXPECT_EQ(self.cycles, 32);
}

TEST(DscOffdiag, RandomMatchesFloatOracle) {
  std::mt19937_64 rng(46);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_row(512, rng, 250);
    const auto b = random_row(512, rng, 250);
    EXPECT_LE(value_err(dsc_compute_offdiag(a, b).ab, float_dot_conj(a, b)), 2 * kLsb);
  }
}

TEST(SubmatrixPlan, Counts) {
  EXPECT_EQ(submatrix_plan(8).size(), 6u);
  const auto four = submatrix_plan(4);
  ASSERT_EQ(four.size(), 1u);
  EXPECT_EQ(four[0], (BlockPair{0, 1}));
  EXPECT_EQ(submatrix_plan(16).size(), 28u);
  EXPECT_TRUE(submatrix_plan(2).empty());
  for (std::size_t n = 4; n <= 32; n += 2) EXPECT_EQ(submatrix_plan(n).size(), (n * n - 2 * n) / 8);
  EXPECT_THROW(submatrix_plan(7), ConfigError);
}

TEST(SubmatrixPlan, RowMajorUpperBlocks) {
  const auto plan = submatrix_plan(8);
  const std::vector<BlockPair> expect = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  EXPECT_EQ(plan, expect);
}

TEST(PrepSchedule, PeriodAndLatencyAtReferencePoint) {
  const CycleLedger l = prep_schedule(8, 512);
  EXPECT_EQ(l.period, 6144);
  EXPECT_NEAR(static_cast<double>(l.latency), 10757.0, 0.05 * 10757.0);
  EXPECT_LE(l.period, l.latency);
  EXPECT_TRUE(l.resources_exclusive());
  EXPECT_EQ(l.latency, 10240);
}

TEST(PrepSchedule, PeriodFormulaAcrossConfigurations) {
  for (std::size_t n : {8u, 10u, 12u, 16u}) {
    for (std::size_t m : {64u, 128u, 256u, 512u, 1024u}) {
      const CycleLedger l = prep_schedule(n, m);
      EXPECT_EQ(l.period, covariance_period_formula(static_cast<std::int64_t>(n), static_cast<std::int64_t>(m)))
          << "N=" << n << " M=" << m;
      EXPECT_TRUE(l.resources_exclusive());
    }
  }
}

TEST(PrepSchedule, PhasesSortedAndInputWriteFirst) {
  const CycleLedger l = prep_schedule(8, 64, 2);
  ASSERT_FALSE(l.phases.empty());
  EXPECT_EQ(l.phases.front().start, 0);
  EXPECT_EQ(l.phases.front().duration(), 8 * 64 / 2);
  for (std::size_t p = 1; p < l.phases.size(); ++p) EXPECT_LE(l.phases[p - 1].start, l.phases[p].start);
  std::set<int> matrices;
  for (const Phase& p : l.phases) matrices.insert(p.matrix);
  EXPECT_EQ(matrices, (std::set<int>{0, 1}));
  EXPECT_THROW(prep_schedule(8, 64, 0), ConfigError);
}

TEST(RunPrep, MatchesManualComposition) {
  const SignalMatrix y = random_signals(4, 8, 47);
  const PrepResult r = run_prep(y);

  const CenteredPair p0 = center_pair(y.row(0), y.row(1));
  const CenteredPair p1 = center_pair(y.row(2), y.row(3));
  const std::vector<std::vector<CFix>> rows = {p0.a, p0.b, p1.a, p1.b};
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t k = 0; k < 8; ++k) EXPECT_EQ(r.centered(i, k), rows[i][k]);
  }
  const DscDiag d0 = dsc_compute_diag(p0.a, p0.b);
  const DscDiag d1 = dsc_compute_diag(p1.a, p1.b);
  EXPECT_EQ(r.covariance.get(0, 0), d0.aa);
  EXPECT_EQ(r.covariance.get(1, 1), d0.bb);
  EXPECT_EQ(r.covariance.get(2, 2), d1.aa);
  EXPECT_EQ(r.covariance.get(3, 3), d1.bb);
  EXPECT_EQ(r.covariance.get(0, 1), dsc_compute_offdiag(p0.a, p0.b).ab);
  EXPECT_EQ(r.covariance.get(2, 3), dsc_compute_offdiag(p1.a, p1.b).ab);

  CFixMatrix x = make_cfix_matrix(2, 8, kDefaultFormat);
  CFixMatrix z = make_cfix_matrix(2, 8, kDefaultFormat);
  for (std::size_t k = 0; k < 8; ++k) {
    x(0, k) = p0.a[k];
    x(1, k) = p0.b[k];
    z(0, k) = p1.a[k];
    z(1, k) = p1.b[k];
  }
  const EcmmaResult block = ecmma_run(x, z, {2, 8, kDefaultFormat, 3});
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 2; ++b) EXPECT_EQ(r.covariance.get(a, 2 + b), block.product(a, b));
  }
}

TEST(RunPrep, MatchesFloatOracleWithinFourLsb) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const BssScenario s = generate_bss(8, 512, seed, ScenarioKind::QpskSources);
    const SignalMatrix y = quantize_signals(s.y, kDefaultFormat);
    const PrepResult r = run_prep(y);
    const FloatMatrix ref = oracle_cov(oracle_center(to_float(y.data())));
    EXPECT_LE(max_abs_diff(to_float(r.covariance), ref), 4 * kLsb) << "seed " << seed;
    EXPECT_EQ(r.saturations, 0u);
    EXPECT_EQ(r.ledger.period, 6144);
  }
}

TEST(RunPrep, DiagonalRealAndNonNegative) {
  const PrepResult r = run_prep(random_signals(8, 64, 48));
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(r.covariance.get(i, i).im.raw(), 0);
    EXPECT_GE(r.covariance.get(i, i).re.raw(), -1);
  }
}

TEST(RunPrep, SmallestConfiguration) {
  const PrepResult r = run_prep(random_signals(2, 2, 49));
  EXPECT_EQ(r.covariance.size(), 2u);
  EXPECT_TRUE(r.ledger.resources_exclusive());
}
