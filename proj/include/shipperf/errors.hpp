#ifndef SHIPPERF_ERRORS_HPP
#define SHIPPERF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace shipperf {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Vessel particulars violate their invariants (non-positive lengths, efficiencies outside (0,1], ...).
class InvalidParticularsError : public Error {
public:
    using Error::Error;
};

/// An argument is outside the mathematical domain of the operation (e.g. stw <= 0 where a log is taken).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A tuning parameter is invalid (e.g. smoothing delta <= 0).
class InvalidParameterError : public Error {
public:
    using Error::Error;
};

/// Not enough data points for the requested fit or segmentation.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// The regression design matrix is rank deficient; message names the collinear columns.
class DegenerateFitError : public Error {
public:
    using Error::Error;
};

/// A coefficient file is missing a required parameter entry; message names it.
class IncompleteCoefficientsError : public Error {
public:
    using Error::Error;
};

/// Evaluation requested outside a theory's validity range in strict mode.
class ValidityError : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature failed to reach the requested tolerance.
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& msg, double achieved)
        : Error(msg), achieved_tolerance(achieved) {}
    double achieved_tolerance;
};

/// A serialized model is malformed (shape chain broken, bad scaling stats, ...).
class ModelError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite loss.
class TrainingDivergedError : public Error {
public:
    TrainingDivergedError(const std::string& msg, int epoch_index)
        : Error(msg), epoch(epoch_index) {}
    int epoch;
};

/// A file does not match its declared or expected schema.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Records are not in the required (time) order.
class OrderingError : public Error {
public:
    using Error::Error;
};

/// A metric is undefined on the given inputs (zero denominator, constant actuals).
class MetricError : public Error {
public:
    using Error::Error;
};

/// Invalid fold count for cross-validation.
class FoldError : public Error {
public:
    using Error::Error;
};

/// A name was not found in a registry; message lists what is registered.
class UnknownNameError : public Error {
public:
    using Error::Error;
};

} // namespace shipperf

#endif
