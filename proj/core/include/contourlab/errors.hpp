#pragma once

#include <stdexcept>
#include <string>

namespace contourlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument or configuration value was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A NaN or otherwise non-finite value showed up where a finite one is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Operation called in a state that does not allow it (e.g. stepping a finished episode).
class StateError : public Error {
 public:
  using Error::Error;
};

/// Malformed file, unknown key, wrong magic or version.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace contourlab
