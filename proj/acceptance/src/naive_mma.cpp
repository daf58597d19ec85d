#include <algorithm>

#include "icaprep/acceptance.hpp"
#include "icaprep/errors.hpp"

namespace icaprep::acceptance {
namespace {

// value / 2^shift rounded half to even, via integer division.
std::int64_t div_pow2_half_even(std::int64_t value, int shift) {
  if (shift == 0) return value;
  const std::int64_t d = std::int64_t{1} << shift;
  std::int64_t q = value / d;
  std::int64_t r = value % d;
  if (r < 0) {
    q -= 1;
    r += d;
  }
  if (2 * r > d || (2 * r == d && q % 2 != 0)) q += 1;
  return q;
}

}  // namespace

CFixMatrix naive_mma(const CFixMatrix& x, const CFixMatrix& y, int output_shift) {
  if (x.rows() != y.rows() || x.cols() != y.cols() || x.rows() == 0 || x.cols() == 0) {
    throw ContractViolation("naive_mma: operands must have equal non-empty shapes");
  }
  const FixFormat fmt = x(0, 0).format();
  const int f = fmt.frac_bits;
  const std::size_t m = x.rows();
  CFixMatrix out = make_cfix_matrix(m, m, fmt);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      std::int64_t re = 0;
      std::int64_t im = 0;
      for (std::size_t k = 0; k < x.cols(); ++k) {
        const std::int64_t ar = x(i, k).re.raw();
        const std::int64_t ai = x(i, k).im.raw();
        const std::int64_t br = y(j, k).re.raw();
        const std::int64_t bi = std::clamp<std::int64_t>(-std::int64_t{y(j, k).im.raw()}, fmt.min_raw(), fmt.max_raw());
        re += div_pow2_half_even(ar * br, f) - div_pow2_half_even(ai * bi, f);
        im += div_pow2_half_even(ar * bi, f) + div_pow2_half_even(ai * br, f);
      }
      out(i, j) = {FixPoint::from_raw(std::clamp(div_pow2_half_even(re, output_shift), fmt.min_raw(), fmt.max_raw()), fmt),
                   FixPoint::from_raw(std::clamp(div_pow2_half_even(im, output_shift), fmt.min_raw(), fmt.max_raw()), fmt)};
    }
  }
  return out;
}

}  // namespace icaprep::acceptance
