#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace locbeta {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of the operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Input data fails validation (sizes, ranges, formats).
class DataError : public Error {
public:
    using Error::Error;
};

/// A (mean, variance) pair with sigma2 >= mu (1 - mu).
class InfeasibleMomentsError : public Error {
public:
    using Error::Error;
};

/// Too few positively weighted observations around a fitting point.
class InsufficientLocalDataError : public Error {
public:
    using Error::Error;
};

/// Something went wrong in an iterative numerical procedure.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A fitted curve could not be completed at some grid points.
class PartialCurveError : public NumericalError {
public:
    PartialCurveError(const std::string& what, std::vector<double> failed)
        : NumericalError(what), failed_centers(std::move(failed)) {}

    std::vector<double> failed_centers;
};

}  // namespace locbeta
