#pragma once

// Fixed-point circular CORDIC.
//
// Angles never appear as registers: a rotation is carried as the sequence of
// micro-rotation directions that realizes it, which is what one CORDIC
// forwards to the others in the EVD pipeline. A DirectionSequence always
// records the micro-rotations actually applied, so replaying it through
// rotate() reproduces the same net rotation on any vector.
//
// The datapath runs with `guard_bits` extra fraction bits, uses rounded
// shifts in the micro-rotations, compensates the CORDIC gain with one
// constant multiply and rounds (nearest-even) back to the word format once.

#include <cstdint>
#include <vector>

#include "icaprep/fixed_point.hpp"

namespace icaprep {

// atan(2^-i) for i = 0..31.
double cordic_elementary_angle(int i);
// prod_{i<K} 1/sqrt(1 + 2^-2i)
double cordic_inverse_gain(int iterations);

class DirectionSequence {
 public:
  DirectionSequence() = default;
  DirectionSequence(std::vector<std::int8_t> signs, bool pre_rotation);

  // Identity rotation of length K (degenerate flag set).
  static DirectionSequence identity(int iterations);

  int size() const { return static_cast<int>(signs_.size()); }
  const std::vector<std::int8_t>& signs() const { return signs_; }
  // A pre-rotation by pi (sign flip of both coordinates) precedes the micro-rotations.
  bool pre_rotation() const { return pre_rotation_; }
  // Set for the (0,0) vectoring case and for identity(); rotate() is a no-op.
  bool degenerate() const { return degenerate_; }

  // Net counter-clockwise rotation in radians, wrapped to (-pi, pi].
  double angle() const;

  // Same micro-rotation magnitudes with every direction flipped: the exact inverse rotation.
  DirectionSequence reversed() const;

  friend bool operator==(const DirectionSequence&, const DirectionSequence&) = default;

 private:
  std::vector<std::int8_t> signs_;
  bool pre_rotation_ = false;
  bool degenerate_ = false;
};

struct CordicConfig {
  int iterations = 10;
  FixFormat fmt = kDefaultFormat;
  int guard_bits = 8;
  // 1/gain quantized at the internal precision (fmt.frac_bits + guard_bits).
  FixPoint gain_comp;

  static CordicConfig make(int iterations = 10, FixFormat fmt = kDefaultFormat, int guard_bits = 8);

  int internal_frac_bits() const { return fmt.frac_bits + guard_bits; }
};

struct VectoringResult {
  FixPoint magnitude;
  DirectionSequence dirs;
  // y left over after the last micro-rotation, before gain compensation, in
  // internal units (2^-internal_frac_bits()).
  std::int64_t residual_y = 0;

  bool degenerate() const { return dirs.degenerate(); }
  // Angle of the input vector, atan2(y, x), as encoded by the directions.
  double angle() const;
};

VectoringResult vectoring(const FixPoint& x, const FixPoint& y, const CordicConfig& cfg);

// Direction sequence that drives the integer vector (x, y) onto the positive
// x axis. The inputs may be at any common scale; only their ratio matters.
DirectionSequence vectoring_directions(std::int64_t x, std::int64_t y, const CordicConfig& cfg);

struct Rotated {
  FixPoint x;
  FixPoint y;
};

// Applies `dirs` (net rotation dirs.angle()) to (x, y). Throws
// ContractViolation if dirs.size() != cfg.iterations or formats differ.
Rotated rotate(const FixPoint& x, const FixPoint& y, const DirectionSequence& dirs, const CordicConfig& cfg);

// Rotates a complex value by `dirs`.
CFix rotate(const CFix& z, const DirectionSequence& dirs, const CordicConfig& cfg);

// Values at the CORDIC's internal precision (internal_frac_bits() fraction
// bits). Chained rotations can stay at this precision and round to the word
// format once.
struct WidePair {
  std::int64_t x = 0;
  std::int64_t y = 0;
};

std::int64_t to_internal(const FixPoint& v, const CordicConfig& cfg);
// Round-to-nearest-even back to cfg.fmt, saturating.
FixPoint from_internal(std::int64_t v, const CordicConfig& cfg);
// Gain-compensated rotation of an internal-precision pair.
WidePair rotate_internal(WidePair v, const DirectionSequence& dirs, const CordicConfig& cfg);

// Greedy decomposition of `angle` over the elementary angles. Angles beyond
// +-pi/2 use the pi pre-rotation.
DirectionSequence angle_to_dirs(double angle, const CordicConfig& cfg);

}  // namespace icaprep
