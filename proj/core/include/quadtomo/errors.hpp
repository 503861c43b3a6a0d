#pragma once

#include <stdexcept>
#include <string>

namespace quadtomo {

// Base of every error the library throws. The CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user-supplied parameters or configuration (exit code 2 in the CLI).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, int row = 0)
      : Error(row > 0 ? "row " + std::to_string(row) + ": " + what : what), row_(row) {}
  int row() const noexcept { return row_; }

 private:
  int row_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Iterative method failed to reach its tolerance; carries the final residual.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// A matrix that must be inverted is singular (or the model asks for an impossible inverse).
class SingularityError : public Error {
 public:
  using Error::Error;
};

// Hamiltonian is not positive semidefinite.
class InstabilityError : public Error {
 public:
  using Error::Error;
};

// Missing or non-positive standard error on a row that enters the weighted fit.
class WeightingError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

}  // namespace quadtomo
