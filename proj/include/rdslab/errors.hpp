#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rdslab {

enum class ErrorKind {
  Parse,
  Domain,
  Construction,
  Numerical,
  Capacity,
  Dimension,
  Consistency,
  NotApplicable,
  Extinction,
  Argument,
  Degenerate,
  Shape,
  Threshold,
  Config,
  Data,
  Precondition,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base error for the library. Every failure carries a kind so callers and
/// tests can branch on the category without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace rdslab
