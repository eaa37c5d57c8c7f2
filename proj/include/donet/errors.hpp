#pragma once

#include <stdexcept>
#include <string>

namespace donet {

// Inconsistent tensor shapes or channel splits.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// NaN/Inf where finite values are required, or a diverged optimisation.
class NumericsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user configuration (bad dimensions, infeasible sampling, unknown keys).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace donet
