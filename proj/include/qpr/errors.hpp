#pragma once

#include <stdexcept>
#include <string>

namespace qpr {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input data violates a structural invariant (trace, symmetry, format).
struct ValidationError : Error {
    using Error::Error;
};

// An exact zero divisor omega.nu was found during a lattice search.
struct RationalDependenceError : Error {
    using Error::Error;
};

// A divisor fell below the configured floor; computing with it would
// poison every later order.
struct SmallDivisorViolation : Error {
    using Error::Error;
};

// Operation called out of order or with inconsistent arguments.
struct UsageError : Error {
    using Error::Error;
};

// Enumeration or integration budget exceeded.
struct ResourceError : Error {
    using Error::Error;
};

// Bad configuration file / CLI arguments.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace qpr
