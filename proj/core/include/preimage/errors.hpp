#pragma once

#include <stdexcept>
#include <string>

namespace preimage {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes or sizes that do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Non-finite samples or otherwise unusable data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid scalar parameter (sigma <= 0, offset out of range, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents (PPM, model container, dataset index).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Solver failure, divergence, NaN/Inf during iteration.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Kernel parameter bisection could not bracket the requested support.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Bad run configuration (unknown keys, missing files, wrong types).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace preimage
