// include/forager/error.hpp
//
// Exception hierarchy shared by every module. CLI maps ConfigError,
// FormatError and ValidationError to exit code 2, everything else to 1.

#pragma once

#include <stdexcept>
#include <string>

namespace forager {

class ForagerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration (bad rates, zero budgets, unknown strategy kind).
class ConfigError : public ForagerError {
 public:
  using ForagerError::ForagerError;
};

/// Input that does not parse. Carries the offending line (1-based, 0 when
/// unknown) and a dotted field path.
class FormatError : public ForagerError {
 public:
  FormatError(const std::string& what, int line, std::string field)
      : ForagerError(what), line_(line), field_(std::move(field)) {}
  int line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  int line_;
  std::string field_;
};

/// Input that parses but violates a documented invariant.
class ValidationError : public ForagerError {
 public:
  using ForagerError::ForagerError;
};

/// Function argument outside its mathematical domain.
class DomainError : public ForagerError {
 public:
  using ForagerError::ForagerError;
};

/// A priority map or proto set with no usable mass.
class DegenerateError : public ForagerError {
 public:
  using ForagerError::ForagerError;
};

}  // namespace forager
