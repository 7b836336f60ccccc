#pragma once

#include <stdexcept>
#include <string>

namespace pirsense {

/// Base class of every error raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The conditioning-set covariance block could not be factorized.
class SingularConditioningSet : public Error {
public:
    using Error::Error;
};

/// A 1 - R^2 style denominator fell below tolerance.
class DegenerateDenominator : public Error {
public:
    using Error::Error;
};

/// An instrument-based quantity was requested without an instrument role.
class InstrumentMissing : public Error {
public:
    using Error::Error;
};

/// |R_{D~Z|X}| is numerically zero, so TSLS quantities are undefined.
class WeakInstrument : public Error {
public:
    using Error::Error;
};

/// Bound declarations do not match the assigned variable roles.
class RoleMismatch : public Error {
public:
    using Error::Error;
};

/// A sensitivity model must declare at least one bound.
class EmptyModel : public Error {
public:
    using Error::Error;
};

/// A compiled constraint interval is already empty before optimization.
class InfeasibleAtCompile : public Error {
public:
    using Error::Error;
};

/// An operation's stated precondition does not hold for the inputs.
class PreconditionViolated : public Error {
public:
    using Error::Error;
};

/// The estimated constraint set is empty on the full sample.
class ModelInfeasibleOnSample : public Error {
public:
    using Error::Error;
};

/// BCa assembly is undefined for the given replicate distribution.
class DegenerateBca : public Error {
public:
    using Error::Error;
};

/// Malformed input file (CSV or config).
class ParseError : public Error {
public:
    using Error::Error;
};

/// A data column that should be numeric is not.
class NonNumericColumn : public Error {
public:
    using Error::Error;
};

/// A referenced column name does not exist in the data.
class MissingColumn : public Error {
public:
    using Error::Error;
};

}  // namespace pirsense
