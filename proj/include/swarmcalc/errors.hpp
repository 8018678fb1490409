#pragma once

#include <stdexcept>
#include <string>

namespace swarmcalc {

// Invalid arguments and malformed inputs are reported as std::invalid_argument.
// The types below cover the remaining failure classes the CLI maps to exit codes.

/// A numerical procedure failed: singular system, non-convergence, empty estimate.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reading or writing a file failed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace swarmcalc
