#pragma once

#include <stdexcept>
#include <string>

namespace bellqmc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidSize : public Error {
 public:
  using Error::Error;
};

class UnsupportedGeometry : public Error {
 public:
  using Error::Error;
};

class UnsupportedMode : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Raised when a broken internal invariant is detected (weight-zero
/// configuration, n out of sync with the operator string, ...).
class InternalCorruption : public Error {
 public:
  using Error::Error;
};

/// The swap/purity estimator produced a non-positive mean, so -ln(mean) is
/// undefined. The raw mean is kept so callers can report it.
class EstimatorExhausted : public Error {
 public:
  EstimatorExhausted(const std::string& what, double raw_mean)
      : Error(what + " (raw mean " + std::to_string(raw_mean) + ")"), raw_mean_(raw_mean) {}
  double raw_mean() const noexcept { return raw_mean_; }

 private:
  double raw_mean_;
};

}  // namespace bellqmc
