#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rms {

// Configuration file problems (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A simulation step produced a non-finite state.
class ModelInstabilityError : public std::runtime_error {
 public:
  ModelInstabilityError(int coordinate, std::int64_t step_index, const std::string& what)
      : std::runtime_error(what), coordinate_(coordinate), step_index_(step_index) {}
  int coordinate() const { return coordinate_; }
  std::int64_t step_index() const { return step_index_; }

 private:
  int coordinate_;
  std::int64_t step_index_;
};

// A step budget ran out (CLI exit code 4). Signals a badly placed
// recurrency set or a misconfigured budget rather than a numerical bug.
class BudgetExceededError : public std::runtime_error {
 public:
  explicit BudgetExceededError(const std::string& what) : std::runtime_error(what) {}
};

// No inward crossing was recorded where at least one is required.
class ZeroCrossingsError : public std::runtime_error {
 public:
  explicit ZeroCrossingsError(const std::string& what) : std::runtime_error(what) {}
};

// Too few records for the requested quantile comparison.
class InsufficientSamplesError : public std::runtime_error {
 public:
  explicit InsufficientSamplesError(const std::string& what) : std::runtime_error(what) {}
};

// Threshold placement cannot invert a non-decreasing pilot profile.
class DegenerateFitError : public std::runtime_error {
 public:
  explicit DegenerateFitError(const std::string& what) : std::runtime_error(what) {}
};

// The discrete-time map has spectral radius >= 1, no stationary law.
class InstabilityError : public std::runtime_error {
 public:
  explicit InstabilityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rms
