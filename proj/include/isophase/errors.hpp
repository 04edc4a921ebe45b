// Exception taxonomy shared by the library and the CLI exit-code mapping.
#pragma once

#include <stdexcept>
#include <string>

namespace isophase {

// File / parse problems (CLI exit code 2).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Chain or input contract violations (CLI exit code 3).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical construction failures (CLI exit code 4).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A Wronskian node encountered where the chain requires nodelessness.
struct NodalWronskianError : NumericalError {
  double x;
  explicit NodalWronskianError(double x_at)
      : NumericalError("nodal Wronskian at x = " + std::to_string(x_at) + " fm, chain invalid"),
        x(x_at) {}
};

// Cross-check disagreements (CLI exit code 5).
struct VerificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace isophase
