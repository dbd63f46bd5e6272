#pragma once

#include <stdexcept>
#include <string>

namespace gridopt {

// Bad caller input: wrong sizes, out-of-range parameters, malformed files.
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// All-zero coefficient vectors and similar inputs with no valid kernel.
struct DegenerateInputError : ArgumentError {
  using ArgumentError::ArgumentError;
};

// A computation produced something it should not have (imaginary residue,
// solver failure).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConvergenceError : NumericalError {
  using NumericalError::NumericalError;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ArgumentError(what);
}

}  // namespace detail
}  // namespace gridopt
