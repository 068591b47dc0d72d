#pragma once

#include <stdexcept>
#include <string>

namespace weakscs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or argument. `field()` names the offending input.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A state or Kraus product lost all of its norm (an outcome of
/// vanishing probability was applied).
class UnderflowError : public Error {
 public:
  using Error::Error;
};

/// The dense Hermitian eigensolver did not converge.
class EigenSolverError : public Error {
 public:
  using Error::Error;
};

/// Tr(E J) vanishes, so the optimal estimator has no direction to return.
class NoEstimateError : public Error {
 public:
  using Error::Error;
};

/// A POVM element has a nonpositive eigenvalue where a strictly positive
/// spectrum is required.
class NotPositiveError : public Error {
 public:
  using Error::Error;
};

/// An output file could not be created or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace weakscs
