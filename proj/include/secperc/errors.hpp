#pragma once

#include <stdexcept>
#include <string>

namespace secperc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on caller-supplied parameters was violated.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Configuration validation failure; carries the offending field path.
class ValidationError : public ParameterError {
 public:
  ValidationError(std::string field, const std::string& message)
      : ParameterError(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// The critical-ratio search bracket does not straddle the target level.
class BracketError : public Error {
 public:
  using Error::Error;
};

/// Broken internal invariant (index/sample mismatch, failed covering check).
class InternalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace secperc
