#include "icaprep/cordic.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "icaprep/errors.hpp"

namespace icaprep {
namespace {

// Literal table so decoded angles are identical on every platform.
constexpr std::array<double, 32> kElementaryAngles = {
    0.78539816339744828,    0.46364760900080609,    0.24497866312686414,    0.12435499454676144,
    0.06241880999595735,    0.031239833430268277,   0.015623728620476831,   0.0078123410601011111,
    0.0039062301319669718,  0.0019531225164788188,  0.00097656218955931946, 0.00048828121119489829,
    0.00024414062014936177, 0.00012207031189367021, 6.1035156174208773e-05, 3.0517578115526096e-05,
    1.5258789061315762e-05, 7.62939453110197e-06,   3.8146972656064961e-06, 1.907348632810187e-06,
    9.5367431640596084e-07, 4.7683715820308884e-07, 2.3841857910155797e-07, 1.1920928955078068e-07,
    5.9604644775390552e-08, 2.9802322387695303e-08, 1.4901161193847655e-08, 7.4505805969238281e-09,
    3.7252902984619141e-09, 1.862645149230957e-09,  9.3132257461547852e-10, 4.6566128730773926e-10,
};

constexpr int kMaxIterations = static_cast<int>(kElementaryAngles.size());

double wrap_angle(double a) {
  constexpr double pi = std::numbers::pi;
  while (a > pi) a -= 2.0 * pi;
  while (a <= -pi) a += 2.0 * pi;
  return a;
}

// Rounded arithmetic shift used inside the micro-rotations.
std::int64_t rshift(std::int64_t v, int i) {
  if (i == 0) return v;
  return (v + (std::int64_t{1} << (i - 1))) >> i;
}

struct Wide {
  std::int64_t x;
  std::int64_t y;
};

Wide apply_micro_rotations(Wide v, const DirectionSequence& dirs) {
  if (dirs.pre_rotation()) v = {-v.x, -v.y};
  const auto& s = dirs.signs();
  for (int i = 0; i < static_cast<int>(s.size()); ++i) {
    const std::int64_t dx = rshift(v.y, i);
    const std::int64_t dy = rshift(v.x, i);
    if (s[i] > 0) {
      v = {v.x - dx, v.y + dy};
    } else {
      v = {v.x + dx, v.y - dy};
    }
  }
  return v;
}

std::int64_t compensate_internal(std::int64_t internal, const CordicConfig& cfg) {
  return shift_round_even(internal * cfg.gain_comp.raw(), cfg.internal_frac_bits());
}

// Gain-compensates an internal value and rounds it back to the word format.
FixPoint compensate(std::int64_t internal, const CordicConfig& cfg) {
  return from_internal(compensate_internal(internal, cfg), cfg);
}

void check_config(const CordicConfig& cfg) {
  if (cfg.iterations < 1 || cfg.iterations > kMaxIterations) {
    throw ConfigError("CORDIC iteration count " + std::to_string(cfg.iterations) + " outside [1, 32]");
  }
}

}  // namespace

double cordic_elementary_angle(int i) { return kElementaryAngles.at(static_cast<std::size_t>(i)); }

double cordic_inverse_gain(int iterations) {
  double k = 1.0;
  for (int i = 0; i < iterations; ++i) k /= std::sqrt(1.0 + std::ldexp(1.0, -2 * i));
  return k;
}

DirectionSequence::DirectionSequence(std::vector<std::int8_t> signs, bool pre_rotation)
    : signs_(std::move(signs)), pre_rotation_(pre_rotation) {
  for (std::int8_t s : signs_) {
    if (s != 1 && s != -1) throw ContractViolation("direction entries must be +1 or -1");
  }
}

DirectionSequence DirectionSequence::identity(int iterations) {
  DirectionSequence d(std::vector<std::int8_t>(static_cast<std::size_t>(iterations), 1), false);
  d.degenerate_ = true;
  return d;
}

double DirectionSequence::angle() const {
  if (degenerate_) return 0.0;
  double a = pre_rotation_ ? std::numbers::pi : 0.0;
  for (std::size_t i = 0; i < signs_.size(); ++i) a += signs_[i] * kElementaryAngles[i];
  return wrap_angle(a);
}

DirectionSequence DirectionSequence::reversed() const {
  DirectionSequence r = *this;
  for (auto& s : r.signs_) s = static_cast<std::int8_t>(-s);
  return r;
}

CordicConfig CordicConfig::make(int iterations, FixFormat fmt, int guard_bits) {
  fmt.validate();
  if (guard_bits < 0 || fmt.frac_bits + guard_bits > 30) {
    throw ConfigError("CORDIC guard bits " + std::to_string(guard_bits) + " out of range");
  }
  CordicConfig cfg;
  cfg.iterations = iterations;
  cfg.fmt = fmt;
  cfg.guard_bits = guard_bits;
  check_config(cfg);
  const int fi = cfg.internal_frac_bits();
  cfg.gain_comp = quantize(cordic_inverse_gain(iterations), FixFormat{fi + 2, fi});
  return cfg;
}

double VectoringResult::angle() const { return dirs.degenerate() ? 0.0 : wrap_angle(-dirs.angle()); }

namespace {

struct VectoringCore {
  Wide v;
  DirectionSequence dirs;
};

VectoringCore run_vectoring(std::int64_t x, std::int64_t y, int iterations) {
  if (x == 0 && y == 0) return {{0, 0}, DirectionSequence::identity(iterations)};
  const bool pre = x < 0;
  Wide v = pre ? Wide{-x, -y} : Wide{x, y};
  std::vector<std::int8_t> signs(static_cast<std::size_t>(iterations));
  for (int i = 0; i < iterations; ++i) {
    // Rotate towards the x axis: clockwise while y >= 0.
    const std::int8_t s = v.y < 0 ? 1 : -1;
    signs[static_cast<std::size_t>(i)] = s;
    const std::int64_t dx = rshift(v.y, i);
    const std::int64_t dy = rshift(v.x, i);
    v = s > 0 ? Wide{v.x - dx, v.y + dy} : Wide{v.x + dx, v.y - dy};
  }
  return {v, DirectionSequence(std::move(signs), pre)};
}

}  // namespace

VectoringResult vectoring(const FixPoint& x, const FixPoint& y, const CordicConfig& cfg) {
  check_config(cfg);
  if (!(x.format() == cfg.fmt) || !(y.format() == cfg.fmt)) {
    throw ContractViolation("vectoring: operand format differs from CORDIC format");
  }
  const std::int64_t gx = std::int64_t{x.raw()} << cfg.guard_bits;
  const std::int64_t gy = std::int64_t{y.raw()} << cfg.guard_bits;
  VectoringCore core = run_vectoring(gx, gy, cfg.iterations);
  if (core.dirs.degenerate()) return {FixPoint::from_raw(0, cfg.fmt), std::move(core.dirs), 0};
  return {compensate(core.v.x, cfg), std::move(core.dirs), core.v.y};
}

DirectionSequence vectoring_directions(std::int64_t x, std::int64_t y, const CordicConfig& cfg) {
  check_config(cfg);
  // Pre-scale so small integer inputs still get enough resolution per micro-step.
  int headroom = 0;
  const std::int64_t mag = std::max(x < 0 ? -x : x, y < 0 ? -y : y);
  while (mag != 0 && headroom < 40 && (mag << headroom) < (std::int64_t{1} << 40)) ++headroom;
  return run_vectoring(x << headroom, y << headroom, cfg.iterations).dirs;
}

std::int64_t to_internal(const FixPoint& v, const CordicConfig& cfg) {
  if (!(v.format() == cfg.fmt)) throw ContractViolation("to_internal: operand format differs from CORDIC format");
  return std::int64_t{v.raw()} << cfg.guard_bits;
}

FixPoint from_internal(std::int64_t v, const CordicConfig& cfg) {
  return FixPoint::from_raw(shift_round_even(v, cfg.guard_bits), cfg.fmt);
}

WidePair rotate_internal(WidePair v, const DirectionSequence& dirs, const CordicConfig& cfg) {
  check_config(cfg);
  if (dirs.size() != cfg.iterations) {
    throw ContractViolation("rotate: direction sequence has " + std::to_string(dirs.size()) +
                            " entries, CORDIC is configured for " + std::to_string(cfg.iterations));
  }
  if (dirs.degenerate()) return v;
  const Wide w = apply_micro_rotations({v.x, v.y}, dirs);
  return {compensate_internal(w.x, cfg), compensate_internal(w.y, cfg)};
}

Rotated rotate(const FixPoint& x, const FixPoint& y, const DirectionSequence& dirs, const CordicConfig& cfg) {
  check_config(cfg);
  if (dirs.size() != cfg.iterations) {
    throw ContractViolation("rotate: direction sequence has " + std::to_string(dirs.size()) +
                            " entries, CORDIC is configured for " + std::to_string(cfg.iterations));
  }
  if (!(x.format() == cfg.fmt) || !(y.format() == cfg.fmt)) {
    throw ContractViolation("rotate: operand format differs from CORDIC format");
  }
  if (dirs.degenerate()) return {x, y};
  const Wide v = apply_micro_rotations(
      {std::int64_t{x.raw()} << cfg.guard_bits, std::int64_t{y.raw()} << cfg.guard_bits}, dirs);
  return {compensate(v.x, cfg), compensate(v.y, cfg)};
}

CFix rotate(const CFix& z, const DirectionSequence& dirs, const CordicConfig& cfg) {
  const Rotated r = rotate(z.re, z.im, dirs, cfg);
  return {r.x, r.y};
}

DirectionSequence angle_to_dirs(double angle, const CordicConfig& cfg) {
  check_config(cfg);
  constexpr double pi = std::numbers::pi;
  double z = wrap_angle(angle);
  bool pre = false;
  if (z > pi / 2) {
    pre = true;
    z -= pi;
  } else if (z < -pi / 2) {
    pre = true;
    z += pi;
  }
  std::vector<std::int8_t> signs(static_cast<std::size_t>(cfg.iterations));
  for (int i = 0; i < cfg.iterations; ++i) {
    const std::int8_t s = z >= 0.0 ? 1 : -1;
    signs[static_cast<std::size_t>(i)] = s;
    z -= s * kElementaryAngles[static_cast<std::size_t>(i)];
  }
  return DirectionSequence(std::move(signs), pre);
}

}  // namespace icaprep
