#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pcf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands with incompatible shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Rejected configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Cost became non-finite during descent.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t step) : Error(what), step_(step) {}

  /// Epoch (or iteration) index at which the cost stopped being finite.
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Backprop disagreed with the finite-difference estimate.
class GradientCheckError : public Error {
 public:
  GradientCheckError(const std::string& what, double epsilon) : Error(what), epsilon_(epsilon) {}

  double epsilon() const noexcept { return epsilon_; }

 private:
  double epsilon_;
};

/// A user with no ratings cannot be modelled.
class ColdUserError : public Error {
 public:
  using Error::Error;
};

}  // namespace pcf
