#pragma once

#include <stdexcept>
#include <string>

namespace usir {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input or precondition violation (bad geometry, negative radius, ...).
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Operand shapes or lengths disagree.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// A numerical routine failed (non-convergence, internal identity violated).
class NumericalError : public Error {
public:
  using Error::Error;
};

/// A pluggable component broke its contract (e.g. denoiser output length).
class ContractError : public Error {
public:
  using Error::Error;
};

/// The requested metric is undefined on the given data (e.g. zero spread).
class UndefinedMetricError : public Error {
public:
  using Error::Error;
};

/// An algorithm does not support the given image size.
class UnsupportedSizeError : public Error {
public:
  using Error::Error;
};

/// Configuration file parse or lookup failure.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Container file IO failure; `kind()` identifies the exact cause.
class IoError : public Error {
public:
  enum class Kind {
    OpenFailed,
    BadMagic,
    BadVersion,
    BadKind,
    Truncated,
    DimsMismatch,
    CrcMismatch,
    WriteFailed,
  };

  IoError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}

  [[nodiscard]] Kind kind() const noexcept { return kind_; }

private:
  Kind kind_;
};

} // namespace usir
