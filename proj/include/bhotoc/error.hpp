#pragma once

#include <stdexcept>
#include <string>

namespace bhotoc {

/// Invalid parameters, incompatible task/basis combinations, malformed config.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure during a run: blow-up, norm drift, cutoff leakage,
/// too many excluded samples.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bhotoc
