#pragma once

#include <stdexcept>

namespace tsc {

/// Invalid user-supplied configuration (dimensions, files, flags). Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A checkpoint or dataset file that cannot be loaded.
class LoadError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Non-finite values during training. Maps to exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tsc
