#pragma once

#include <stdexcept>
#include <string>

namespace magnomech {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad physical input (nonpositive length, negative rate, ...).
struct DomainError : Error {
    using Error::Error;
};

// Tensor-structure mismatch between operators, states, and layouts.
struct LayoutError : Error {
    using Error::Error;
};

// Non-finite values, failed convergence of a numeric kernel, trace drift.
struct NumericError : Error {
    using Error::Error;
};

// Pump at or past the parametric instability threshold |Omega_p/Delta_x| >= 1.
struct InstabilityError : Error {
    using Error::Error;
};

// Bath coefficients violating |M| <= sqrt(N(N+1)).
struct BathError : Error {
    using Error::Error;
};

// Malformed configuration file or CLI option.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace magnomech
