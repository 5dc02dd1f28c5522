#pragma once

#include <stdexcept>
#include <string>

namespace wsr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix or network dimensions do not fit together.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A matrix required to be positive semidefinite has a negative eigenvalue
/// beyond tolerance.
class IndefiniteError : public Error {
 public:
  using Error::Error;
};

/// A pair of matrices does not admit the common block structure needed by the
/// extended difference-of-logdet, or a saddle step whose dual pair is not
/// admissible. Usually a modeling error upstream.
class IllPosedError : public Error {
 public:
  using Error::Error;
};

/// Invalid scenario, configuration or file contents.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The iterative solver could not proceed (bracket failure, monotonicity
/// violation, scaling factor out of range).
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace wsr
