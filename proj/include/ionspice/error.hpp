#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ionspice {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Linear or nonlinear solve failure.
class SolverError : public Error {
public:
    using Error::Error;
};

/// A calibration stage could not extract its quantity. The message is
/// prefixed with the stage name.
class CalibrationError : public Error {
public:
    CalibrationError(const std::string& stage, const std::string& what)
        : Error(stage + ": " + what), stage_(stage) {}

    [[nodiscard]] const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace ionspice
