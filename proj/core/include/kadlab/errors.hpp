#pragma once

#include <stdexcept>
#include <string>

namespace kadlab {

// Thrown when a caller breaks a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

// Thrown when a parameter combination is valid but not covered by a formula.
class UnsupportedParameter : public std::invalid_argument {
 public:
  explicit UnsupportedParameter(const std::string& what) : std::invalid_argument(what) {}
};

inline void require(bool condition, const char* message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace kadlab
