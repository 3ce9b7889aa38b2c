#pragma once

#include <stdexcept>
#include <string>

namespace critwave {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user-facing parameter or configuration value.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Inputs have incompatible shapes (grids, snapshot spacing, too few points).
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Solver configuration violates the time-step rule or other setup constraints.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Evaluation requested outside the region where an object is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Non-finite values appeared during time integration.
class NumericalBlowup : public Error {
public:
    NumericalBlowup(const std::string& what, double time)
        : Error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

/// A front came within reach of the computational boundary.
class DomainTooSmall : public Error {
public:
    using Error::Error;
};

/// Requested KPP wave speed is below the minimal speed.
class NoMonotoneWave : public Error {
public:
    using Error::Error;
};

/// Adaptive integrator could not keep the step size above its floor.
class StiffnessError : public Error {
public:
    StiffnessError(const std::string& what, double location)
        : Error(what), location_(location) {}
    double location() const noexcept { return location_; }

private:
    double location_;
};

}  // namespace critwave
