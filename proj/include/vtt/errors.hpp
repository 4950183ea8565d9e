#ifndef VTT_ERRORS_HPP_
#define VTT_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vtt {

/// A precondition of an operation was violated by the caller
/// (dimension mismatch, non-monotone frame index, zero frame interval...).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Zero-area quad or rectangle where a positive area is required.
class GeometryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Template with zero intensity variance; correlation carries no signal.
class NoSignalError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Input data that parsed but is semantically invalid.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input, located by line and column (both 1-based).
class ParseError : public ValidationError {
 public:
  ParseError(std::string source, std::size_t line, std::size_t column, const std::string& reason)
      : ValidationError(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " +
                        reason),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Metric that is undefined for the given input (e.g. no ground truth boxes).
class UndefinedMetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// File system or stream failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vtt

#endif  // VTT_ERRORS_HPP_
