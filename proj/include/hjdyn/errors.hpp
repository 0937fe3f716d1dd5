// Error taxonomy shared across modules; the CLI maps these to exit codes.
#pragma once

#include <stdexcept>
#include <string>

namespace hjdyn {

/// Invalid input: schema violations, unknown symbols, precondition failures.
struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Structurally valid model the toolkit cannot treat: non-affine momenta,
/// configuration-dependent Hessian rank, singular regular sector.
struct UnsupportedModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown during integration or sampling.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hjdyn
