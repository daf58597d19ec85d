#pragma once

// Efficient complex-valued matrix multiplication array (ECMMA).
//
// One column of 2m PEs (a real and an imaginary PE per output row) behind m
// complex multipliers. Each cycle one column k of X and one conjugated
// element Y[j][k] are broadcast; PE pair i accumulates product[i][j]. The
// accumulators for the m output columns are time-multiplexed through the
// 2m^2 registers, so X·Y^H takes exactly m·n cycles with every PE busy on
// every cycle.

#include <cstdint>
#include <optional>
#include <vector>

#include "icaprep/fixed_point.hpp"
#include "icaprep/matrix.hpp"

namespace icaprep {

struct EcmmaConfig {
  int m = 3;
  int n = 64;
  FixFormat fmt = kDefaultFormat;
  // Rounding right shift applied at writeback (log2(M) for a covariance pass).
  int output_shift = 0;
};

struct ResourceCensus {
  std::int64_t pes = 0;
  std::int64_t adders = 0;
  std::int64_t multiplexors = 0;
  std::int64_t registers = 0;
  std::int64_t cycles_per_pass = 0;

  friend bool operator==(const ResourceCensus&, const ResourceCensus&) = default;
};

// Proposed array: PEs 2m, adders 2m, muxes 4m, registers 2m^2+2m, m·n cycles.
ResourceCensus ecmma_resource_census(const EcmmaConfig& cfg);
// The fully parallel m×m array it replaces: 2m^2 PEs and adders, no muxes.
ResourceCensus baseline_mma_resource_census(const EcmmaConfig& cfg);

struct EcmmaCycle {
  std::int64_t cycle;
  int column;         // k, column of X and Y consumed
  int output_column;  // j, which accumulator bank the PEs serve this cycle
  int active_pes;
};

struct EcmmaResult {
  CFixMatrix product;  // m×m
  std::int64_t cycles = 0;
  std::optional<std::vector<EcmmaCycle>> trace;

  double utilization() const;  // from trace; 1.0 when every PE works every cycle
};

// product = X·Y^H (scaled by 2^-output_shift). X and Y are m×n.
EcmmaResult ecmma_run(const CFixMatrix& x, const CFixMatrix& y, const EcmmaConfig& cfg, bool with_trace = false);

}  // namespace icaprep
