#include "icaprep/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "icaprep/errors.hpp"

namespace icaprep {
namespace {

thread_local std::uint64_t t_saturation_events = 0;

void require_same_format(const FixFormat& a, const FixFormat& b, const char* op) {
  if (!(a == b)) {
    throw ContractViolation(std::string(op) + ": operand formats differ (Q(" + std::to_string(a.word_length) + "," +
                            std::to_string(a.frac_bits) + ") vs Q(" + std::to_string(b.word_length) + "," +
                            std::to_string(b.frac_bits) + "))");
  }
}

}  // namespace

void FixFormat::validate() const {
  if (!valid()) {
    throw ConfigError("invalid fixed-point format Q(" + std::to_string(word_length) + "," + std::to_string(frac_bits) +
                      "): need 2 <= word_length <= 32 and 0 <= frac_bits < word_length");
  }
}

FixPoint FixPoint::from_raw(std::int64_t raw, FixFormat fmt) {
  const std::int64_t hi = fmt.max_raw();
  const std::int64_t lo = fmt.min_raw();
  if (raw > hi || raw < lo) {
    ++t_saturation_events;
    return FixPoint(static_cast<std::int32_t>(std::clamp(raw, lo, hi)), fmt, true);
  }
  return FixPoint(static_cast<std::int32_t>(raw), fmt, false);
}

SaturationScope::SaturationScope() : start_(t_saturation_events) {}

std::uint64_t SaturationScope::count() const { return t_saturation_events - start_; }

std::int64_t shift_round_even(std::int64_t value, int shift) {
  if (shift <= 0) return value * (std::int64_t{1} << -shift);
  const std::int64_t floor = value >> shift;  // arithmetic shift
  const std::int64_t rem = value - (floor << shift);
  const std::int64_t half = std::int64_t{1} << (shift - 1);
  if (rem > half || (rem == half && (floor & 1) != 0)) return floor + 1;
  return floor;
}

int log2_exact(std::int64_t v) {
  if (!is_power_of_two(v)) throw ConfigError("value " + std::to_string(v) + " is not a power of two");
  int n = 0;
  while ((std::int64_t{1} << n) < v) ++n;
  return n;
}

FixPoint quantize(double x, FixFormat fmt) {
  // Clamp well outside any 32-bit range first so the integer conversion is defined.
  const double limit = 0x1p40;
  const double scaled = std::clamp(std::ldexp(x, fmt.frac_bits), -limit, limit);
  double floor = std::floor(scaled);
  const double diff = scaled - floor;
  if (diff > 0.5 || (diff == 0.5 && std::fmod(floor, 2.0) != 0.0)) floor += 1.0;
  return FixPoint::from_raw(static_cast<std::int64_t>(floor), fmt);
}

FixPoint fx_add(const FixPoint& a, const FixPoint& b) {
  require_same_format(a.format(), b.format(), "fx_add");
  return FixPoint::from_raw(std::int64_t{a.raw()} + b.raw(), a.format());
}

FixPoint fx_sub(const FixPoint& a, const FixPoint& b) {
  require_same_format(a.format(), b.format(), "fx_sub");
  return FixPoint::from_raw(std::int64_t{a.raw()} - b.raw(), a.format());
}

FixPoint fx_neg(const FixPoint& a) { return FixPoint::from_raw(-std::int64_t{a.raw()}, a.format()); }

std::int64_t fx_mul_unsaturated(const FixPoint& a, const FixPoint& b) {
  require_same_format(a.format(), b.format(), "fx_mul");
  return shift_round_even(std::int64_t{a.raw()} * b.raw(), a.format().frac_bits);
}

FixPoint fx_mul(const FixPoint& a, const FixPoint& b) {
  return FixPoint::from_raw(fx_mul_unsaturated(a, b), a.format());
}

CFix cfx_add(const CFix& a, const CFix& b) { return {fx_add(a.re, b.re), fx_add(a.im, b.im)}; }

CFix cfx_sub(const CFix& a, const CFix& b) { return {fx_sub(a.re, b.re), fx_sub(a.im, b.im)}; }

CFix cfx_conj(const CFix& a) { return {a.re, fx_neg(a.im)}; }

CFix cfx_mul(const CFix& a, const CFix& b) {
  const FixPoint rr = fx_mul(a.re, b.re);
  const FixPoint ii = fx_mul(a.im, b.im);
  const FixPoint ri = fx_mul(a.re, b.im);
  const FixPoint ir = fx_mul(a.im, b.re);
  return {fx_sub(rr, ii), fx_add(ri, ir)};
}

FixPoint fx_mean_accumulate(std::span<const FixPoint> samples) {
  const int shift = log2_exact(static_cast<std::int64_t>(samples.size()));
  const FixFormat fmt = samples.front().format();
  std::int64_t acc = 0;
  for (const FixPoint& s : samples) {
    require_same_format(fmt, s.format(), "fx_mean_accumulate");
    acc += s.raw();
  }
  return FixPoint::from_raw(shift_round_even(acc, shift), fmt);
}

void ComplexMac::accumulate_conj(const CFix& a, const CFix& b) { accumulate(a, cfx_conj(b)); }

void ComplexMac::accumulate(const CFix& a, const CFix& b) {
  require_same_format(fmt_, a.format(), "ComplexMac");
  re_ += fx_mul_unsaturated(a.re, b.re) - fx_mul_unsaturated(a.im, b.im);
  im_ += fx_mul_unsaturated(a.re, b.im) + fx_mul_unsaturated(a.im, b.re);
}

CFix ComplexMac::writeback(int shift) const {
  return CFix::from_raw(shift_round_even(re_, shift), shift_round_even(im_, shift), fmt_);
}

}  // namespace icaprep
