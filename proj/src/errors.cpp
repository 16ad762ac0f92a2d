#include "rdslab/errors.hpp"

namespace rdslab {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Construction: return "construction";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Capacity: return "capacity";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Consistency: return "consistency";
    case ErrorKind::NotApplicable: return "not-applicable";
    case ErrorKind::Extinction: return "extinction";
    case ErrorKind::Argument: return "argument";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Threshold: return "threshold";
    case ErrorKind::Config: return "config";
    case ErrorKind::Data: return "data";
    case ErrorKind::Precondition: return "precondition";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

ParseError::ParseError(std::size_t line, const std::string& what)
    : Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + what), line_(line) {}

}  // namespace rdslab
