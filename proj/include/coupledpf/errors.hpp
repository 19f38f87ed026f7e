#pragma once

#include <stdexcept>
#include <string>

namespace coupledpf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix arguments whose sizes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A precondition on an argument value was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Model evaluation produced a non-finite state (blow-up).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Operation not provided by this model, e.g. a transition density for an implicit model.
class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

/// Numerical failure such as kernel underflow in the transport solver.
class NumericalError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

inline void require_dims(bool condition, const std::string& message) {
  if (!condition) throw DimensionError(message);
}

}  // namespace detail
}  // namespace coupledpf
