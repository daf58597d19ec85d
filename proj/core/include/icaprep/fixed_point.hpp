#pragma once

// Bit-exact fixed-point scalars for the preprocessor datapath.
//
// Every value carries its format; results are always inside the format's
// raw range. Rounding is round-to-nearest-even everywhere and overflow
// saturates. Saturation events are flagged on the produced value and
// counted per thread (see SaturationScope).

#include <cstdint>
#include <span>

namespace icaprep {

struct FixFormat {
  int word_length = 10;  // total bits, sign included
  int frac_bits = 8;

  constexpr std::int64_t max_raw() const { return (std::int64_t{1} << (word_length - 1)) - 1; }
  constexpr std::int64_t min_raw() const { return -(std::int64_t{1} << (word_length - 1)); }
  constexpr double lsb() const { return 1.0 / static_cast<double>(std::int64_t{1} << frac_bits); }
  constexpr double max_value() const { return static_cast<double>(max_raw()) * lsb(); }
  constexpr double min_value() const { return static_cast<double>(min_raw()) * lsb(); }
  constexpr bool valid() const {
    return word_length >= 2 && word_length <= 32 && frac_bits >= 0 && frac_bits <= word_length - 1;
  }

  // Throws ConfigError when !valid().
  void validate() const;

  friend constexpr bool operator==(const FixFormat&, const FixFormat&) = default;
};

inline constexpr FixFormat kDefaultFormat{10, 8};

class FixPoint {
 public:
  constexpr FixPoint() = default;

  // Saturates `raw` into `fmt`; the result remembers whether it clipped.
  static FixPoint from_raw(std::int64_t raw, FixFormat fmt);

  constexpr std::int32_t raw() const { return raw_; }
  constexpr const FixFormat& format() const { return fmt_; }
  constexpr bool saturated() const { return saturated_; }
  double value() const { return static_cast<double>(raw_) * fmt_.lsb(); }

  // Equality is on (raw, format); the saturation flag is diagnostic only.
  friend constexpr bool operator==(const FixPoint& a, const FixPoint& b) {
    return a.raw_ == b.raw_ && a.fmt_ == b.fmt_;
  }

 private:
  constexpr FixPoint(std::int32_t raw, FixFormat fmt, bool sat) : raw_(raw), fmt_(fmt), saturated_(sat) {}

  std::int32_t raw_ = 0;
  FixFormat fmt_ = kDefaultFormat;
  bool saturated_ = false;
};

struct CFix {
  FixPoint re;
  FixPoint im;

  static CFix zero(FixFormat fmt) { return {FixPoint::from_raw(0, fmt), FixPoint::from_raw(0, fmt)}; }
  static CFix from_raw(std::int64_t re, std::int64_t im, FixFormat fmt) {
    return {FixPoint::from_raw(re, fmt), FixPoint::from_raw(im, fmt)};
  }
  const FixFormat& format() const { return re.format(); }
  bool saturated() const { return re.saturated() || im.saturated(); }

  friend bool operator==(const CFix&, const CFix&) = default;
};

// Counts saturation events raised on the current thread while alive.
// Scopes nest; each reports only the events since its own construction.
class SaturationScope {
 public:
  SaturationScope();
  SaturationScope(const SaturationScope&) = delete;
  SaturationScope& operator=(const SaturationScope&) = delete;

  std::uint64_t count() const;

 private:
  std::uint64_t start_;
};

// Arithmetic right shift by `shift` bits with round-to-nearest-even.
// shift <= 0 shifts left.
std::int64_t shift_round_even(std::int64_t value, int shift);

FixPoint quantize(double x, FixFormat fmt);
inline double dequantize(const FixPoint& x) { return x.value(); }

FixPoint fx_add(const FixPoint& a, const FixPoint& b);
FixPoint fx_sub(const FixPoint& a, const FixPoint& b);
FixPoint fx_neg(const FixPoint& a);
FixPoint fx_mul(const FixPoint& a, const FixPoint& b);

// Product rounded to the format's fraction bits but not saturated; the
// building block of the wide MAC accumulators.
std::int64_t fx_mul_unsaturated(const FixPoint& a, const FixPoint& b);

CFix cfx_add(const CFix& a, const CFix& b);
CFix cfx_sub(const CFix& a, const CFix& b);
CFix cfx_conj(const CFix& a);
// (a.re*b.re - a.im*b.im, a.re*b.im + a.im*b.re): four rounded fx_mul,
// then fx_sub / fx_add, each saturated.
CFix cfx_mul(const CFix& a, const CFix& b);

// Mean of `samples` using a wide accumulator and a rounding shift-divide.
// samples.size() must be a power of two.
FixPoint fx_mean_accumulate(std::span<const FixPoint> samples);

// Wide multiply-accumulate register for complex products.
//
// Each product is rounded to the operand format's fraction bits exactly as
// cfx_mul would, but neither the products nor the running sum saturate.
// Saturation happens once, at writeback. Because the sum of rounded
// integers is exact, the result is independent of accumulation order.
class ComplexMac {
 public:
  explicit ComplexMac(FixFormat fmt) : fmt_(fmt) {}

  // acc += a * conj(b); the conjugate is taken at operand fetch (fx_neg on b.im).
  void accumulate_conj(const CFix& a, const CFix& b);
  // acc += a * b
  void accumulate(const CFix& a, const CFix& b);

  // Divides by 2^shift with round-to-nearest-even, then saturates.
  CFix writeback(int shift = 0) const;

  std::int64_t re_raw() const { return re_; }
  std::int64_t im_raw() const { return im_; }

 private:
  FixFormat fmt_;
  std::int64_t re_ = 0;
  std::int64_t im_ = 0;
};

constexpr bool is_power_of_two(std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; }
int log2_exact(std::int64_t v);  // throws ConfigError unless v is a power of two

}  // namespace icaprep
