#pragma once

#include <stdexcept>
#include <string>

namespace viscoctl {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent configuration (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input violates an operation's precondition (exit code 3).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Iterative or linear solver failed to reach its target (exit code 4).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace viscoctl
