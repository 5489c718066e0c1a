#pragma once

#include <stdexcept>
#include <string>

namespace irsopt {

/// Base for all library failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector/matrix shapes that do not agree with the scenario.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The rate-threshold constraints cannot be met by the starting point.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// The conic engine failed to deliver a usable solution.
class SolverError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace irsopt
