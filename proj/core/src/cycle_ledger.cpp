#include "icaprep/cycle_ledger.hpp"

#include <algorithm>

#include "icaprep/errors.hpp"

namespace icaprep {

double CycleLedger::throughput_matrices_per_sec(double clock_hz) const {
  if (period <= 0) return 0.0;
  return clock_hz / static_cast<double>(period);
}

double CycleLedger::micro_matrices_per_cycle() const {
  if (period <= 0) return 0.0;
  return 1e6 / static_cast<double>(period);
}

bool CycleLedger::resources_exclusive() const {
  for (std::size_t a = 0; a < phases.size(); ++a) {
    for (std::size_t b = a + 1; b < phases.size(); ++b) {
      const Phase& p = phases[a];
      const Phase& q = phases[b];
      if (p.start >= q.end || q.start >= p.end) continue;
      for (const auto& r : p.resources) {
        if (std::find(q.resources.begin(), q.resources.end(), r) != q.resources.end()) return false;
      }
    }
  }
  return true;
}

std::int64_t CycleLedger::max_end() const {
  std::int64_t end = 0;
  for (const auto& p : phases) end = std::max(end, p.end);
  return end;
}

const Phase& ResourceScheduler::schedule(std::string name, std::vector<std::string> resources, std::int64_t ready,
                                         std::int64_t duration, int matrix) {
  if (duration < 0) throw ContractViolation("negative phase duration for " + name);
  std::int64_t start = ready;
  for (const auto& r : resources) start = std::max(start, free_at(r));
  const std::int64_t end = start + duration;
  for (const auto& r : resources) free_[r] = end;
  phases_.push_back({std::move(name), std::move(resources), matrix, start, end});
  return phases_.back();
}

std::int64_t ResourceScheduler::free_at(const std::string& resource) const {
  const auto it = free_.find(resource);
  return it == free_.end() ? 0 : it->second;
}

}  // namespace icaprep
