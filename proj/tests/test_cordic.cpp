#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "icaprep/cordic.hpp"
#include "icaprep/errors.hpp"

using namespace icaprep;

namespace {

constexpr double kPi = std::numbers::pi;
const CordicConfig kCfg = CordicConfig::make();
const double kLsb = kDefaultFormat.lsb();
const double kAngleTol = std::ldexp(1.0, 1 - kCfg.iterations);

FixPoint q(double v) { return quantize(v, kDefaultFormat); }

double angle_diff(double a, double b) {
  double d = std::fmod(a - b, 2 * kPi);
  if (d > kPi) d -= 2 * kPi;
  if (d < -kPi) d += 2 * kPi;
  return std::abs(d);
}

}  // namespace

TEST(CordicConfig, GainCompensation) {
  EXPECT_NEAR(cordic_inverse_gain(10), 0.607253, 1e-6);
  EXPECT_NEAR(kCfg.gain_comp.value(), cordic_inverse_gain(10), kCfg.gain_comp.format().lsb());
  EXPECT_THROW(CordicConfig::make(0), ConfigError);
  EXPECT_THROW(CordicConfig::make(33), ConfigError);
  EXPECT_THROW(CordicConfig::make(10, kDefaultFormat, -1), ConfigError);
  EXPECT_THROW(CordicConfig::make(10, FixFormat{10, 12}), ConfigError);
}

TEST(CordicVectoring, ZeroAngle) {
  const VectoringResult r = vectoring(q(1.0), q(0.0), kCfg);
  EXPECT_NEAR(r.magnitude.value(), 1.0, 2 * kLsb);
  EXPECT_LE(angle_diff(r.angle(), 0.0), kAngleTol);
  EXPECT_FALSE(r.degenerate());
}

TEST(CordicVectoring, AxisCase) {
  const VectoringResult r = vectoring(q(0.0), q(0.9), kCfg);
  EXPECT_LE(angle_diff(r.angle(), kPi / 2), kAngleTol);
  EXPECT_NEAR(r.magnitude.value(), 0.9, 2 * kLsb);
}

TEST(CordicVectoring, Diagonal) {
  const FixPoint v = q(0.7);
  const VectoringResult r = vectoring(v, v, kCfg);
  const double quant = std::abs(std::atan2(v.value(), v.value()) - kPi / 4);
  EXPECT_LE(angle_diff(r.angle(), kPi / 4), kAngleTol + quant);
  EXPECT_NEAR(r.magnitude.value(), std::hypot(v.value(), v.value()), 3 * kLsb);
  EXPECT_NEAR(r.magnitude.value(), 0.9899, 3 * kLsb);
}

TEST(CordicVectoring, NegativeXUsesPreRotation) {
  const VectoringResult r = vectoring(q(-0.5), q(0.25), kCfg);
  EXPECT_TRUE(r.dirs.pre_rotation());
  EXPECT_LE(angle_diff(r.angle(), std::atan2(0.25, -0.5)), kAngleTol);
  EXPECT_NEAR(r.magnitude.value(), std::hypot(0.5, 0.25), 3 * kLsb);
}

TEST(CordicVectoring, DegenerateOrigin) {
  const VectoringResult r = vectoring(q(0.0), q(0.0), kCfg);
  EXPECT_TRUE(r.degenerate());
  EXPECT_EQ(r.magnitude.raw(), 0);
  EXPECT_EQ(r.angle(), 0.0);
  ASSERT_EQ(r.dirs.size(), kCfg.iterations);
  for (auto s : r.dirs.signs()) EXPECT_EQ(s, 1);
  const Rotated id = rotate(q(0.3), q(-0.2), r.dirs, kCfg);
  EXPECT_EQ(id.x, q(0.3));
  EXPECT_EQ(id.y, q(-0.2));
}

TEST(CordicVectoring, FormatMismatchIsContractViolation) {
  const FixPoint other = FixPoint::from_raw(1, FixFormat{12, 8});
  EXPECT_THROW(vectoring(other, q(0.1), kCfg), ContractViolation);
}

TEST(CordicVectoring, RandomMatchesAtan2AndHypot) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int t = 0; t < 2000; ++t) {
    const FixPoint x = q(u(rng));
    const FixPoint y = q(u(rng));
    const double r = std::hypot(x.value(), y.value());
    if (r < 8 * kLsb) continue;
    const VectoringResult v = vectoring(x, y, kCfg);
    // Angle error from the last micro-rotation, widened by raw-grid resolution near the origin.
    EXPECT_LE(angle_diff(v.angle(), std::atan2(y.value(), x.value())), kAngleTol + 2 * kLsb / r);
    EXPECT_NEAR(v.magnitude.value(), r, 3 * kLsb);
  }
}

TEST(CordicVectoring, ConvergenceResidual) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const double internal_lsb = std::ldexp(1.0, -kCfg.internal_frac_bits());
  for (int t = 0; t < 2000; ++t) {
    const FixPoint x = q(u(rng));
    const FixPoint y = q(u(rng));
    const VectoringResult v = vectoring(x, y, kCfg);
    const double residual = std::abs(static_cast<double>(v.residual_y)) * internal_lsb * kCfg.gain_comp.value();
    EXPECT_LE(residual, std::hypot(x.value(), y.value()) * kAngleTol + 2 * kLsb);
  }
}

TEST(CordicRotate, SelfConsistency) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int t = 0; t < 2000; ++t) {
    const FixPoint x = q(u(rng));
    const FixPoint y = q(u(rng));
    const VectoringResult v = vectoring(x, y, kCfg);
    const Rotated r = rotate(x, y, v.dirs, kCfg);
    EXPECT_EQ(r.x, v.magnitude);
    EXPECT_LE(std::abs(r.y.value()), 2 * kLsb + v.magnitude.value() * kAngleTol);
  }
}

TEST(CordicRotate, ZeroAngleIsIdentity) {
  const DirectionSequence zero = vectoring(q(1.0), q(0.0), kCfg).dirs;
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int t = 0; t < 500; ++t) {
    const FixPoint x = q(u(rng));
    const FixPoint y = q(u(rng));
    const Rotated r = rotate(x, y, zero, kCfg);
    EXPECT_NEAR(r.x.value(), x.value(), 2 * kLsb);
    EXPECT_NEAR(r.y.value(), y.value(), 2 * kLsb);
  }
}

TEST(CordicRotate, PiOverThree) {
  const Rotated r = rotate(q(1.0), q(0.0), angle_to_dirs(kPi / 3, kCfg), kCfg);
  EXPECT_NEAR(r.x.value(), 0.5, kAngleTol + 3 * kLsb);
  EXPECT_NEAR(r.y.value(), std::sqrt(3.0) / 2, kAngleTol + 3 * kLsb);
}

TEST(CordicRotate, ComplexOverloadMatchesPair) {
  const CFix z = CFix::from_raw(100, -37, kDefaultFormat);
  const DirectionSequence d = angle_to_dirs(1.1, kCfg);
  const Rotated r = rotate(z.re, z.im, d, kCfg);
  const CFix c = rotate(z, d, kCfg);
  EXPECT_EQ(c.re, r.x);
  EXPECT_EQ(c.im, r.y);
}

TEST(CordicRotate, WrongLengthIsContractViolation) {
  const DirectionSequence d = angle_to_dirs(0.3, CordicConfig::make(12));
  EXPECT_THROW(rotate(q(0.1), q(0.1), d, kCfg), ContractViolation);
}

TEST(CordicRotate, InternalPathMatchesWordPath) {
  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int t = 0; t < 500; ++t) {
    const FixPoint x = q(u(rng));
    const FixPoint y = q(u(rng));
    const DirectionSequence d = angle_to_dirs(u(rng) * 2, kCfg);
    const WidePair w = rotate_internal({to_internal(x, kCfg), to_internal(y, kCfg)}, d, kCfg);
    const Rotated r = rotate(x, y, d, kCfg);
    EXPECT_EQ(from_internal(w.x, kCfg), r.x);
    EXPECT_EQ(from_internal(w.y, kCfg), r.y);
  }
}

TEST(CordicInvariant, MagnitudePreservation) {
  std::mt19937_64 rng(26);
  std::uniform_real_distribution<double> u(-1.3, 1.3);
  std::uniform_real_distribution<double> a(-kPi, kPi);
  const double gain_quant = std::abs(kCfg.gain_comp.value() - cordic_inverse_gain(kCfg.iterations)) /
                            cordic_inverse_gain(kCfg.iterations);
  for (int t = 0; t < 2000; ++t) {
    const FixPoint x = q(u(rng));
    const FixPoint y = q(u(rng));
    const double r0 = std::hypot(x.value(), y.value());
    if (r0 > 1.9) continue;
    const Rotated r = rotate(x, y, angle_to_dirs(a(rng), kCfg), kCfg);
    EXPECT_NEAR(std::hypot(r.x.value(), r.y.value()), r0, r0 * gain_quant + 3 * kLsb);
  }
}

TEST(CordicInvariant, AngleAdditivity) {
  std::mt19937_64 rng(27);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  std::uniform_real_distribution<double> a(-kPi / 2, kPi / 2);
  for (int t = 0; t < 1000; ++t) {
    const FixPoint x = q(u(rng));
    const FixPoint y = q(u(rng));
    const double alpha = a(rng);
    const double beta = a(rng);
    const Rotated one = rotate(x, y, angle_to_dirs(alpha, kCfg), kCfg);
    const Rotated two = rotate(one.x, one.y, angle_to_dirs(beta, kCfg), kCfg);
    const Rotated sum = rotate(x, y, angle_to_dirs(alpha + beta, kCfg), kCfg);
    const double tol = std::hypot(x.value(), y.value()) * 2 * kAngleTol + 6 * kLsb;
    EXPECT_NEAR(two.x.value(), sum.x.value(), tol);
    EXPECT_NEAR(two.y.value(), sum.y.value(), tol);
  }
}

TEST(CordicInvariant, ReplayIsBitExact) {
  const DirectionSequence d = vectoring(q(0.3), q(-0.8), kCfg).dirs;
  const Rotated a = rotate(q(0.61), q(0.12), d, kCfg);
  const Rotated b = rotate(q(0.61), q(0.12), d, kCfg);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(vectoring(q(0.3), q(-0.8), kCfg).dirs, d);
}

TEST(AngleToDirs, Examples) {
  EXPECT_LE(std::abs(angle_to_dirs(0.0, kCfg).angle()), kAngleTol);
  const DirectionSequence d = angle_to_dirs(std::atan(1.0), kCfg);
  EXPECT_EQ(d.signs().front(), 1);
  EXPECT_LE(std::abs(d.angle() - kPi / 4), kAngleTol);
}

TEST(AngleToDirs, RandomDecodeWithinBound) {
  std::mt19937_64 rng(28);
  std::uniform_real_distribution<double> a(-kPi, kPi);
  for (int t = 0; t < 100; ++t) {
    const double angle = a(rng);
    const DirectionSequence d = angle_to_dirs(angle, kCfg);
    EXPECT_LE(angle_diff(d.angle(), angle), kAngleTol);
    EXPECT_EQ(d.pre_rotation(), std::abs(angle) > kPi / 2);
  }
}

TEST(DirectionSequence, ReversedNegatesAngle) {
  const DirectionSequence d = angle_to_dirs(0.4, kCfg);
  EXPECT_NEAR(d.reversed().angle(), -d.angle(), 1e-12);
  EXPECT_THROW(DirectionSequence({1, 0, -1}, false), ContractViolation);
}
