#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace c2gan {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes of vectors, matrices or networks disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A NaN or infinity showed up where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Invalid hyperparameters or an unusable dataset configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A dataset or example violates a structural invariant.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// An index or value lies outside its declared range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Test data lacks something an evaluation needs.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. Carries the 1-based line number (0 if unknown).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace c2gan
