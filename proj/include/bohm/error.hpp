#pragma once

#include <stdexcept>
#include <string>

namespace bohm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on arguments was violated (bad grid size, dt = 0, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ZeroNorm : public Error {
 public:
  ZeroNorm() : Error("wave function has zero norm") {}
};

class GridMismatch : public Error {
 public:
  GridMismatch() : Error("operands live on different grids") {}
};

/// Polar-form velocity requested where the density is too small for a phase.
class NearNode : public Error {
 public:
  using Error::Error;
};

/// Rejection sampling would accept fewer than one proposal in a million.
class EnvelopeFailure : public Error {
 public:
  using Error::Error;
};

/// Conditional wave function slice vanishes at the requested environment point.
class NullSlice : public Error {
 public:
  using Error::Error;
};

class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

/// Scenario grid does not resolve the requested state.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Run configuration is malformed or refers to unknown names.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace bohm
