#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace breachcat {

// Bad input data or arguments. The CLI maps these to exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A mandatory column is missing from a CSV header.
class SchemaError : public InputError {
public:
    using InputError::InputError;
};

class IoError : public InputError {
public:
    using InputError::InputError;
};

// An operation was called outside its documented domain.
class PreconditionError : public InputError {
public:
    using InputError::InputError;
};

// Optimizer failure or a likelihood with no finite maximum. Exit code 3.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, std::vector<double> last_iterate = {})
        : std::runtime_error(what), last_iterate_(std::move(last_iterate)) {}

    const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }

private:
    std::vector<double> last_iterate_;
};

// Sample on which the MLE diverges (e.g. every observation equals the threshold).
class DegenerateSampleError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace breachcat
