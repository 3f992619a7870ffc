#pragma once

#include <stdexcept>
#include <string>

namespace safeopt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: dimension mismatches, out-of-range parameters.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Factorization failures and other numerical breakdowns.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation's documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// No candidate point is certified safe.
class EmptySafeSetError : public Error {
 public:
  using Error::Error;
};

/// Starting-point generation could not produce a safe/unsafe pair.
class InitializationError : public Error {
 public:
  using Error::Error;
};

/// The measurement device failed to return outputs.
class PlantError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration. `field()` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace safeopt
