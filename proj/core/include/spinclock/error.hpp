#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace spinclock {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Spin or nuclear-spin quantum number is not a positive half-integer.
class InvalidSpinError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation (e.g. a negative gap).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An input violated a documented precondition (e.g. a non-Hermitian matrix).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// A closed-form shortcut was requested outside the regime it is valid for.
class UnsupportedFormulaError : public Error {
 public:
  using Error::Error;
};

/// Problem size exceeds a hard resource cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not produce a result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Van Vleck sum hit a (quasi-)degenerate pair with a non-zero moment element.
class SingularTermError : public NumericalError {
 public:
  SingularTermError(std::size_t i, std::size_t j, const std::string& what)
      : NumericalError(what), first(i), second(j) {}
  std::size_t first;
  std::size_t second;
};

/// Malformed configuration, JSON or CSV input. `line` is 1-based, 0 when unknown.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::size_t line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Non-fatal diagnostics collected by operations that accept a sink.
using Warnings = std::vector<std::string>;

}  // namespace spinclock
