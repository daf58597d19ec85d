#include "icaprep/ecmma.hpp"

#include <string>

#include "icaprep/errors.hpp"

namespace icaprep {

ResourceCensus ecmma_resource_census(const EcmmaConfig& cfg) {
  const std::int64_t m = cfg.m;
  return {2 * m, 2 * m, 4 * m, 2 * m * m + 2 * m, m * std::int64_t{cfg.n}};
}

ResourceCensus baseline_mma_resource_census(const EcmmaConfig& cfg) {
  const std::int64_t m = cfg.m;
  return {2 * m * m, 2 * m * m, 0, 2 * m * m + 2 * m, m * std::int64_t{cfg.n}};
}

double EcmmaResult::utilization() const {
  if (!trace || trace->empty()) return 0.0;
  const std::int64_t capacity = static_cast<std::int64_t>(trace->size()) * 2 * static_cast<std::int64_t>(product.rows());
  std::int64_t busy = 0;
  for (const auto& c : *trace) busy += c.active_pes;
  return static_cast<double>(busy) / static_cast<double>(capacity);
}

EcmmaResult ecmma_run(const CFixMatrix& x, const CFixMatrix& y, const EcmmaConfig& cfg, bool with_trace) {
  if (cfg.m < 1 || cfg.n < 1) throw ContractViolation("ECMMA needs m >= 1 and n >= 1");
  const auto m = static_cast<std::size_t>(cfg.m);
  const auto n = static_cast<std::size_t>(cfg.n);
  if (x.rows() != m || x.cols() != n || y.rows() != m || y.cols() != n) {
    throw ContractViolation("ECMMA operands must be " + std::to_string(m) + "x" + std::to_string(n) + ", got " +
                            std::to_string(x.rows()) + "x" + std::to_string(x.cols()) + " and " +
                            std::to_string(y.rows()) + "x" + std::to_string(y.cols()));
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (!(x(i, k).format() == cfg.fmt) || !(y(i, k).format() == cfg.fmt)) {
        throw ContractViolation("ECMMA operand format differs from array format");
      }
    }
  }

  // accumulators[i*m + j]: the register bank of PE pair i for output column j
  std::vector<ComplexMac> acc(m * m, ComplexMac(cfg.fmt));
  EcmmaResult result;
  if (with_trace) result.trace.emplace().reserve(m * n);

  std::int64_t cycle = 0;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < m; ++j, ++cycle) {
      const CFix& broadcast = y(j, k);
      for (std::size_t i = 0; i < m; ++i) acc[i * m + j].accumulate_conj(x(i, k), broadcast);
      if (with_trace) {
        result.trace->push_back({cycle, static_cast<int>(k), static_cast<int>(j), 2 * cfg.m});
      }
    }
  }

  result.product = make_cfix_matrix(m, m, cfg.fmt);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) result.product(i, j) = acc[i * m + j].writeback(cfg.output_shift);
  }
  result.cycles = cycle;
  return result;
}

}  // namespace icaprep
