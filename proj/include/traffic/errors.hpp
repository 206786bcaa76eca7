#pragma once

#include <stdexcept>
#include <string>

namespace traffic {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input (graph DSL, word, law name, config file).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line = 0, int column = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what
                       : what),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// A size guard was exceeded (partition count, tensor size, depth, ...).
class GuardError : public Error {
 public:
  using Error::Error;
};

/// A precondition of an operation does not hold (missing variable, domain error, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A rooted count needs more of the network than was constructed.
class TruncationError : public GuardError {
 public:
  using GuardError::GuardError;
};

}  // namespace traffic
