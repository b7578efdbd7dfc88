#ifndef GRADFLOW_ERRORS_HPP
#define GRADFLOW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gradflow {

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Minimal geodesics are not unique (e.g. antipodal points on a sphere).
struct NonUniqueGeodesic : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The requested operation needs a curvature bound the space does not have.
struct UnsupportedSpace : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConvergenceFailure : std::runtime_error {
  ConvergenceFailure(const std::string& what, double residual)
      : std::runtime_error(what), residual(residual) {}
  double residual;
};

}  // namespace gradflow

#endif
