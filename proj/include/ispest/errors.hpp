#pragma once

#include <stdexcept>
#include <string>

namespace ispest {

/// Invalid input: bad parameters, unsupported requests, out-of-range arguments.
/// Maps to exit code 2 in the command-line tool.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation that could not produce a meaningful number.
/// Maps to exit code 3 in the command-line tool.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedMomentError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class InfiniteMeanError : public ValidationError {
public:
    explicit InfiniteMeanError(const std::string& what)
        : ValidationError(what + ": E[eta]=inf") {}
};

class RangeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ScaleSelectionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DegenerateContrastError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class QuadratureError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace ispest
