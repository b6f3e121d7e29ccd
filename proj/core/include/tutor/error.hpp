#pragma once

#include <stdexcept>
#include <string>

namespace tutor {

/// Root of every exception thrown by the tutor library. Module headers derive
/// their own error types from it so callers can catch per-module or globally.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Request or input failed validation (maps to HTTP 422 at the API layer).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Declared extension point with no implementation (HTTP 501).
class NotImplemented : public Error {
 public:
  using Error::Error;
};

}  // namespace tutor
