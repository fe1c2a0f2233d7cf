#pragma once

#include <stdexcept>
#include <string>

namespace eoslab {

// Raised when an iterative numerical procedure cannot produce a reliable
// result (bracket failure, singular denominator, divergent expansion).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace eoslab
