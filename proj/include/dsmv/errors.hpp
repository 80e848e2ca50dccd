#pragma once

#include <stdexcept>
#include <string>

namespace dsmv {

/// Base class for every error raised on malformed user input.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public InputError {
 public:
  SyntaxError(const std::string& message, int line, int column)
      : InputError(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class SemanticError : public InputError {
 public:
  using InputError::InputError;
};

/// An atom or expression is not affine (e.g. a product of two variables).
class NonlinearError : public InputError {
 public:
  using InputError::InputError;
};

class UnknownLabelError : public InputError {
 public:
  using InputError::InputError;
};

class DimensionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class EmptyPolyhedronError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A map does not assign an expression to a label it is checked on.
class CoverageError : public InputError {
 public:
  using InputError::InputError;
};

class UnboundedSupportError : public InputError {
 public:
  using InputError::InputError;
};

class UnsupportedFeatureError : public InputError {
 public:
  using InputError::InputError;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class MalformedDerivationError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace dsmv
