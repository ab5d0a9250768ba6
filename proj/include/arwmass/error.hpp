#pragma once

#include <stdexcept>
#include <string>

namespace arwmass {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical computation could not continue (degenerate metric, non-spacelike
/// surface, H <= 0 along a flow, ...).
class NumericalAbort : public Error {
 public:
  using Error::Error;
};

/// Inputs violate a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace arwmass
