#pragma once

#include <stdexcept>
#include <string>

namespace ucrl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad file, inconsistent dimensions, violated type invariant.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Configuration problems surfaced to the CLI as exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Dispatch outside the unit's allowed range.
class InvalidDispatchError : public Error {
 public:
  using Error::Error;
};

/// Unit parameters that make a formula undefined (e.g. zero capacity).
class InvalidUnitError : public Error {
 public:
  using Error::Error;
};

/// The network splits into islands; PTDFs are undefined.
class IslandingError : public Error {
 public:
  using Error::Error;
};

/// No feasible commitment / dispatch exists for the instance.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation's precondition (e.g. acting from an empty set).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss or parameters during training.
class DivergenceError : public Error {
 public:
  DivergenceError(int member, const std::string& what)
      : Error("member " + std::to_string(member) + ": " + what), member_(member), reason_(what) {}
  int member() const { return member_; }
  const std::string& reason() const { return reason_; }

 private:
  int member_;
  std::string reason_;
};

}  // namespace ucrl
