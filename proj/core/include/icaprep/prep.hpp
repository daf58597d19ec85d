#pragma once

// Centering and covariance units.
//
// Signals are processed in pairs: the centering bank accumulates a pair's
// means (M cycles), then re-reads the pair and subtracts (M cycles) while
// the DSC consumes the centered stream to form the two diagonal covariance
// entries. While the bank accumulates the next pair, the DSC reads the
// centered pair back from memory for the pair's cross term. The remaining
// upper-triangle 2×2 blocks go through the ECMMA, 2M cycles each.

#include <cstdint>
#include <span>
#include <vector>

#include "icaprep/cycle_ledger.hpp"
#include "icaprep/fixed_point.hpp"
#include "icaprep/matrix.hpp"

namespace icaprep {

// N×M complex signal block. N even, M a power of two >= 2.
class SignalMatrix {
 public:
  SignalMatrix(std::size_t n, std::size_t m, FixFormat fmt);
  explicit SignalMatrix(CFixMatrix data);

  std::size_t n() const { return data_.rows(); }
  std::size_t m() const { return data_.cols(); }
  const FixFormat& format() const { return fmt_; }

  CFix& operator()(std::size_t i, std::size_t k) { return data_(i, k); }
  const CFix& operator()(std::size_t i, std::size_t k) const { return data_(i, k); }
  std::span<const CFix> row(std::size_t i) const { return data_.row(i); }
  std::span<CFix> row(std::size_t i) { return data_.row(i); }
  const CFixMatrix& data() const { return data_; }

  friend bool operator==(const SignalMatrix&, const SignalMatrix&) = default;

 private:
  CFixMatrix data_;
  FixFormat fmt_;
};

// N×N Hermitian matrix; only the diagonal and upper triangle are stored.
class HermitianMatrix {
 public:
  HermitianMatrix(std::size_t n, FixFormat fmt);

  // Checks conjugate symmetry within `tolerance_lsb` per component and
  // keeps the upper triangle. Diagonal imaginary parts are dropped.
  static HermitianMatrix from_full(const CFixMatrix& full, int tolerance_lsb = 0);

  std::size_t size() const { return n_; }
  const FixFormat& format() const { return fmt_; }

  // (j, i) with j > i reads back as conj of the stored (i, j).
  CFix get(std::size_t i, std::size_t j) const;
  // Stores (i, j), or conj(value) at (j, i) when i > j. Diagonal values must
  // have a zero imaginary part and re >= -1 LSB.
  void set(std::size_t i, std::size_t j, const CFix& value);

  CFixMatrix to_full() const;

  friend bool operator==(const HermitianMatrix&, const HermitianMatrix&) = default;

 private:
  std::size_t index(std::size_t i, std::size_t j) const { return i * n_ - i * (i + 1) / 2 + j; }

  std::size_t n_ = 0;
  FixFormat fmt_;
  std::vector<CFix> upper_;
};

struct CenteredPair {
  std::vector<CFix> a;
  std::vector<CFix> b;
  CFix mean_a;
  CFix mean_b;
  std::int64_t cycles = 0;  // 2M: accumulate pass + subtract pass
};

CFix complex_mean(std::span<const CFix> row);
CenteredPair center_pair(std::span<const CFix> y_a, std::span<const CFix> y_b);

struct DscDiag {
  CFix aa;
  CFix bb;
  std::int64_t cycles = 0;
};

struct DscOffdiag {
  CFix ab;
  std::int64_t cycles = 0;
};

// (1/M) sum y·conj(y) for each row; imaginary part is exactly zero.
DscDiag dsc_compute_diag(std::span<const CFix> y_bar_a, std::span<const CFix> y_bar_b);
// (1/M) sum y_a·conj(y_b).
DscOffdiag dsc_compute_offdiag(std::span<const CFix> y_bar_a, std::span<const CFix> y_bar_b);

// A 2×2 covariance block handled by the ECMMA: rows of signal pair
// `row_pair`, columns of signal pair `col_pair` (0-based pair indices).
struct BlockPair {
  int row_pair = 0;
  int col_pair = 0;
  friend bool operator==(const BlockPair&, const BlockPair&) = default;
};

// Upper off-diagonal 2×2 blocks in row-major order; (N^2 - 2N)/8 entries.
std::vector<BlockPair> submatrix_plan(std::size_t n);

// Steady-state centering+covariance period for N >= 8: (N^2·M - 2·N·M)/4.
std::int64_t covariance_period_formula(std::int64_t n, std::int64_t m);

// Event-driven schedule of `stream_length` back-to-back N×M matrices.
// latency is the first matrix's completion cycle; period is measured
// between the last two completions (0 when stream_length < 2).
CycleLedger prep_schedule(std::size_t n, std::size_t m, int stream_length = 3);

struct PrepResult {
  SignalMatrix centered;
  HermitianMatrix covariance;
  CycleLedger ledger;
  std::uint64_t saturations = 0;
};

PrepResult run_prep(const SignalMatrix& y, int stream_length = 3);

}  // namespace icaprep
