#pragma once

// Pipelined Hermitian Jacobi EVD.
//
// A 2×2 Hermitian block is diagonalized in five stages: a phase rotation
// makes the off-diagonal pair real (stages 1-2), a real Jacobi angle is
// found (stage 3) and applied from the left and the right (stages 4-5).
// Angles travel as CORDIC direction sequences. Off-diagonal blocks and the
// eigenvector accumulator are rotated with the same sequences.
//
// With U = diag(1, e^{-i theta}) · R(phi), the working matrix is updated as
// D <- U^H D U and the eigenvectors as E <- E U.

#include <cstdint>
#include <utility>
#include <vector>

#include "icaprep/cordic.hpp"
#include "icaprep/cycle_ledger.hpp"
#include "icaprep/fixed_point.hpp"
#include "icaprep/matrix.hpp"
#include "icaprep/prep.hpp"

namespace icaprep {

struct RotationParams {
  DirectionSequence theta;  // net rotation -theta, theta = arg(p12)
  DirectionSequence phi;    // net rotation -phi
  int i = 0;
  int j = 1;
  // Identifies the ordering that produced the parameters.
  std::uint64_t epoch = 0;

  static RotationParams identity(int i, int j, const CordicConfig& cfg, std::uint64_t epoch = 0);
};

struct Diag2x2Result {
  FixPoint d1;
  FixPoint d2;
  // Off-diagonal value left after stage 5 (real; ideally zero).
  FixPoint residual;
  RotationParams params;
  // Block after the phase stages: real symmetric [[a, c], [c, d]].
  CFixMatrix after_phase;
};

// P is 2×2; must be Hermitian within 1 LSB per component.
Diag2x2Result diagonalize_2x2(const CFixMatrix& p, const CordicConfig& cfg, std::uint64_t epoch = 0);

// U_row^H · S · U_col for a 2×2 block. Both parameter sets must carry the
// same epoch.
CFixMatrix rotate_offdiag(const CFixMatrix& s, const RotationParams& row, const RotationParams& col,
                          const CordicConfig& cfg);

// Right rotation of an (x1, x2) column pair: (x1, x2) <- (x1, x2) · U.
std::pair<CFix, CFix> rotate_right(const CFix& x1, const CFix& x2, const RotationParams& params,
                                   const CordicConfig& cfg);

// Parallel (round-robin) orderings, 0-based indices, each pair with i < j.
using Ordering = std::vector<std::pair<int, int>>;
std::vector<Ordering> parallel_ordering(std::size_t n);

// A block of the pair-reconstructed matrix: rows of pair `row`, columns of
// pair `col` (positions within the ordering).
struct BlockRef {
  int row = 0;
  int col = 0;
  friend bool operator==(const BlockRef&, const BlockRef&) = default;
};

// Hazard-free issue order: diagonal blocks first, then the off-diagonal
// blocks the next ordering's diagonal blocks need, soonest-needed first,
// then the rest in row-major order.
std::vector<BlockRef> submatrix_sequence(int ordering_index, std::size_t n);
// Plain row-major issue order over all (N/2)^2 blocks.
std::vector<BlockRef> row_major_sequence(std::size_t n);

struct EvdCycleModel {
  int pipeline_depth = 10;
  int issue_interval = 2;
  int sweeps = 20;
  int stages = 5;

  void validate() const;
};

enum class IssuePolicy {
  HazardFree,    // submatrix_sequence + element scoreboard
  NaiveBarrier,  // row-major; each ordering waits for the previous one to drain
};

struct PipelineStats {
  std::int64_t issue_cycles = 0;   // blocks × issue_interval
  std::int64_t stall_cycles = 0;   // extra cycles spent waiting on hazards
  std::int64_t max_boundary_stall = 0;  // worst stall at one ordering boundary
  std::int64_t max_boundary_idle = 0;   // that stall summed over all pipeline stages
  std::int64_t drain_cycles = 0;   // depth - issue_interval after the final issue
  std::int64_t total_cycles = 0;   // issue + stall
  std::vector<Phase> orderings;    // one phase per ordering: first issue to last issue slot end
};

PipelineStats simulate_evd_pipeline(std::size_t n, const EvdCycleModel& model, IssuePolicy policy);

// S × (N-1) × (N/2)^2 × issue_interval
std::int64_t evd_cycle_formula(std::size_t n, const EvdCycleModel& model);

struct EvdResult {
  std::vector<FixPoint> eigenvalues;  // hardware order (diagonal of D)
  CFixMatrix d;                       // final working matrix
  CFixMatrix e;                       // accumulated eigenvectors, columns
  std::vector<std::int64_t> trace_raw_per_ordering;
  std::vector<double> off_norm_lsb_per_sweep;  // Frobenius norm of off(D) in LSB
  PipelineStats pipeline;
  CycleLedger ledger;
  std::uint64_t saturations = 0;
};

// Frobenius norm of the off-diagonal part, in LSB.
double off_norm_lsb(const CFixMatrix& d);

struct EvdOptions {
  // Keep the eigenvector registers at CORDIC internal precision and round to
  // the word format only on output. When false, E is rounded after every
  // update like D.
  bool wide_eigenvectors = true;
};

EvdResult evd_run(const HermitianMatrix& yc, const EvdCycleModel& model = {},
                  const CordicConfig& cfg = CordicConfig::make(), const EvdOptions& options = {});

}  // namespace icaprep
