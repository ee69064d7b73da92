#pragma once

#include <stdexcept>
#include <string>

namespace balarm {

// Bad input: dimension mismatch, malformed file, violated precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An algorithm failed to produce a usable answer (non-convergence, too many
// failed replicates, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace balarm
