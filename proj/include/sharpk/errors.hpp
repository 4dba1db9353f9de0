#pragma once

#include <stdexcept>
#include <string>

namespace sharpk {

// Raised when a computed result breaks a mathematical guarantee it should satisfy
// (ceiling exceeded, eigen-relation off, periodization too lossy).
class InvariantViolation : public std::runtime_error {
 public:
  explicit InvariantViolation(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sharpk
