#pragma once

#include <stdexcept>
#include <string>

namespace binreg {

/// Malformed input file (CSV/JSON); message carries row/column context.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition or invariant.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A numerical operation left its domain (non-SPD matrix, degenerate
/// weights, diverged iteration).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace binreg
