#pragma once

#include <stdexcept>
#include <string>

namespace bst {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

enum class ViolationKind { Bijection, Boundary, Accessibility, Compactness };

const char* to_string(ViolationKind kind);

class ValidationError : public std::runtime_error {
 public:
  ValidationError(ViolationKind kind, std::string point, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " violation at " + point + ": " + what),
        kind_(kind),
        point_(std::move(point)) {}
  ViolationKind kind() const { return kind_; }
  const std::string& point() const { return point_; }

 private:
  ViolationKind kind_;
  std::string point_;
};

// Invalid arguments: bad dimension, lambda, start site, mismatched barrier.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct QuadratureError : NumericalError {
  using NumericalError::NumericalError;
};

struct SingularMatrixError : NumericalError {
  using NumericalError::NumericalError;
};

struct MaxStepsExceeded : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace bst
