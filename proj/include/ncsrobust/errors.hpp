#pragma once

#include <stdexcept>
#include <string>

namespace ncsrobust {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract input: bad dimensions, improper transfer
/// functions, radii outside [0, 1), schema violations.
class InputError : public Error {
public:
    using Error::Error;
};

/// The input is well formed but the requested quantity does not exist,
/// e.g. the H-infinity norm of an unstable system.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A feedback interconnection is not causally invertible (algebraic loop or
/// singular feedthrough).
class WellPosednessError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Frequency response requested at (or numerically on top of) a pole.
class PoleProximityError : public DomainError {
public:
    using DomainError::DomainError;
};

/// An iterative numerical routine failed to converge.
class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace ncsrobust
