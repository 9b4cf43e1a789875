#pragma once

#include <stdexcept>

namespace uslab {

/// a_r(theta) = 0: no point can be accepted, so eta and the conditional
/// gradient are undefined.
class ZeroAcceptanceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The requested quantity needs a continuous acceptance function.
class NotDifferentiableError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace uslab
