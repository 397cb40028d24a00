#pragma once

#include <stdexcept>
#include <string>

namespace isingcut {

// Raised when a numerical procedure cannot reach a valid iterate, e.g. a
// matrix that must stay positive definite cannot be recovered by
// backtracking, or an enumeration would exceed the configured size limit.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace isingcut
