#pragma once

#include <stdexcept>
#include <string>

namespace aoii {

/// A model parameter or configuration value failed validation.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Base class for failures of the numerical machinery (series, searches).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// An infinite series did not reach its cutoff within the iteration ceiling.
class TruncationError : public NumericalError {
 public:
  explicit TruncationError(const std::string& what) : NumericalError(what) {}
};

/// A series failed its ratio test.
class DivergenceError : public NumericalError {
 public:
  explicit DivergenceError(const std::string& what) : NumericalError(what) {}
};

/// The threshold bracket grew past the configured ceiling.
class ThresholdNotFound : public NumericalError {
 public:
  explicit ThresholdNotFound(const std::string& what) : NumericalError(what) {}
};

}  // namespace aoii
