#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pinnflow {

/// Bad user-supplied value (coordinates, sizes, counts).
class InvalidArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inconsistent or unusable configuration (grids, specs, config files).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite value encountered in a numeric pipeline.
class NumericFaultError : public std::runtime_error {
 public:
  explicit NumericFaultError(const std::string& what, int layer = -1)
      : std::runtime_error(what), layer_index(layer) {}
  int layer_index;
};

/// Interpolation query with no valid support nodes in reach.
class InterpSupportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reference solver failed to reach a steady state.
class SolverDivergenceError : public std::runtime_error {
 public:
  explicit SolverDivergenceError(const std::string& what,
                                 std::vector<double> history = {})
      : std::runtime_error(what), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

}  // namespace pinnflow
