#pragma once

#include <stdexcept>
#include <string>

namespace fppe {

/// Raised when a configuration value violates a documented invariant.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Base class for runtime numerical failures (as opposed to caller bugs).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Quadrature refinement changed an assembled quantity beyond tolerance.
struct QuadratureInstabilityError : NumericalError {
    using NumericalError::NumericalError;
};

/// An iterative solver exhausted its budget without meeting its tolerance.
struct ConvergenceError : NumericalError {
    using NumericalError::NumericalError;
};

/// Two independent computational routes to the same constant disagree.
struct CrossCheckError : NumericalError {
    using NumericalError::NumericalError;
};

}  // namespace fppe
