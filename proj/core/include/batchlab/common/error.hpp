#pragma once

#include <stdexcept>
#include <string>

namespace batchlab {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shape mismatch or an operation applied to the wrong rank.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// NaN or Inf produced where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Environment misuse (stepping a finished episode, unknown environment, failed scripted controller).
class EnvError : public Error {
 public:
  using Error::Error;
};

/// Dataset-level failures such as an empty filtered dataset.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration. `field()` names the offending key path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Malformed or unreadable persisted artifact (checkpoints, trajectory files).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace batchlab
