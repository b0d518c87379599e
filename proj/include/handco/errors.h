#pragma once

#include <stdexcept>
#include <string>

namespace handco {

/// A design that cannot be built (e.g. a base pushed off the palm). Scored 0.
class InfeasibleDesign : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: config, design or journal files. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A produced artifact failed one of its own checks. CLI exit code 3.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace handco
