#pragma once

#include <stdexcept>
#include <string>

namespace vmar {

/// Inconsistent dimensions, out-of-range ranks, invalid arguments.
class StructuralError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerically degenerate input: singular A0, zero-variance series, singular regressors.
class DegenerateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed user input (files, flags).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Model fails a validity check such as stationarity.
class ModelInvalidError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Not enough observations for the requested operation.
class DataInsufficientError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every optimizer start failed. The message carries per-start diagnostics.
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A state the algorithms guarantee cannot occur (e.g. negative LR statistic).
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace vmar
