#pragma once

#include <stdexcept>
#include <string>

namespace blocktt {

/// Raised when a dense materialization would exceed the configured size cap.
class SizeLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Local problem too small to hold the requested number of states.
class LocalDimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solver configuration rejected during validation.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace blocktt
