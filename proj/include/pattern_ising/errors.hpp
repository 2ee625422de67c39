#pragma once

#include <stdexcept>
#include <string>

namespace pattern_ising {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid geometry or combinatorics while constructing a pattern or graph.
struct BuildError : Error {
  using Error::Error;
};

// An operation received inputs outside its supported size limits.
struct SizeLimitError : Error {
  using Error::Error;
};

// Numerical failure: singular system, determinant off its expected branch,
// residual above tolerance, and similar conditions.
struct NumericalError : Error {
  using Error::Error;
};

}  // namespace pattern_ising
