#pragma once

#include <stdexcept>
#include <string>

namespace regtrace {

// Raised when a scenario or model violates a hypothesis of the trace
// formula or a structural requirement of the input format.  Maps to
// process exit code 1.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a numerical procedure fails its own quality gates
// (eigensolver non-convergence, quadrature with non-vanishing imaginary
// part, pole proximity, contour miscounts).  Maps to exit code 2.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace regtrace
