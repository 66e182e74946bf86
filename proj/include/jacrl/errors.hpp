#ifndef JACRL_ERRORS_HPP_
#define JACRL_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace jacrl {

// Exit codes used by the CLI: 0 success, 2 validation, 3 numerical failure.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Simulator state left the admissible region (non-finite or |x| > 1e6).
struct NumericalBlowup : NumericalError {
  using NumericalError::NumericalError;
};

// Initial pose penetrates the wall.
struct GeometryError : ValidationError {
  using ValidationError::ValidationError;
};

struct ShapeMismatch : ValidationError {
  using ValidationError::ValidationError;
};

// Unregularized normal equations are rank deficient.
struct SingularSystem : NumericalError {
  using NumericalError::NumericalError;
};

struct SingularConfiguration : NumericalError {
  using NumericalError::NumericalError;
};

struct NonConvergence : NumericalError {
  using NumericalError::NumericalError;
};

struct NonFiniteLoss : NumericalError {
  using NumericalError::NumericalError;
};

struct CheckpointMismatch : ValidationError {
  using ValidationError::ValidationError;
};

struct ConfigError : ValidationError {
  using ValidationError::ValidationError;
};

struct EmptyCohort : ValidationError {
  using ValidationError::ValidationError;
};

struct IncompleteRun : ValidationError {
  using ValidationError::ValidationError;
};

}  // namespace jacrl

#endif  // JACRL_ERRORS_HPP_
