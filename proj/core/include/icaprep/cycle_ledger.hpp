#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace icaprep {

struct Phase {
  std::string name;
  std::vector<std::string> resources;
  int matrix = 0;  // index of the input matrix in a back-to-back stream
  std::int64_t start = 0;
  std::int64_t end = 0;  // exclusive

  std::int64_t duration() const { return end - start; }
};

struct CycleLedger {
  std::vector<Phase> phases;
  std::int64_t latency = 0;  // first matrix, from cycle 0 to its last result
  std::int64_t period = 0;   // steady-state cycles between consecutive results

  double throughput_matrices_per_sec(double clock_hz) const;
  // µMatrices per cycle, 1e6 / period.
  double micro_matrices_per_cycle() const;

  // True when no two phases hold a common resource during overlapping cycles.
  bool resources_exclusive() const;
  std::int64_t max_end() const;
};

// In-order list scheduler over named resource tokens. Each task starts at the
// first cycle at which its dependencies are done and all of its resources
// have been released by earlier tasks. Simulated time only.
class ResourceScheduler {
 public:
  // Returns the finished phase (start/end filled in).
  const Phase& schedule(std::string name, std::vector<std::string> resources, std::int64_t ready,
                        std::int64_t duration, int matrix = 0);

  std::int64_t free_at(const std::string& resource) const;
  const std::vector<Phase>& phases() const { return phases_; }

 private:
  std::map<std::string, std::int64_t> free_;
  std::vector<Phase> phases_;
};

}  // namespace icaprep
