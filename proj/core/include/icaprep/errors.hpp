#pragma once

#include <stdexcept>
#include <string>

namespace icaprep {

// A caller broke a documented precondition (mismatched formats, wrong
// dimensions, stale rotation parameters, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A configuration is outside what the hardware model supports
// (odd N, non power-of-two M, out-of-range word length, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed signal or config file. The message names the offending
// line or byte offset.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Covariance is rank deficient relative to the whitening floor.
class RankDeficiencyError : public std::runtime_error {
 public:
  RankDeficiencyError(const std::string& what, std::size_t index)
      : std::runtime_error(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace icaprep
