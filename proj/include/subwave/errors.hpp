#pragma once

#include <stdexcept>
#include <string>

namespace subwave {

// Thrown when a computation leaves the realm of trustworthy numbers:
// step-size collapse in the adaptive integrator, non-finite field values
// appearing mid-run (nonlinear blow-up on the grid), and the like.
// Callers that map errors to process exit codes treat this as "numerics
// failed" (exit 2), distinct from bad input (std::invalid_argument, exit 1).
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace subwave
