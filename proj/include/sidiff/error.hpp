#pragma once

#include <stdexcept>
#include <string>

namespace sidiff {

/// Base class of every error raised by the library. The C API maps each
/// subclass onto a distinct status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite or out-of-range argument.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment, schedule or catalog configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A grid or quadrature cannot resolve the requested scale.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver failed to converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// The request is well-formed but outside what the method supports
/// (e.g. a degenerate Hessian at a global minimum).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Too few usable data points for an estimator.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sidiff
