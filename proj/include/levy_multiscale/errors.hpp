// SPDX-License-Identifier: MIT
#pragma once

#include <stdexcept>
#include <string>

namespace levy_multiscale {

/// Process exit codes of the command-line tool.
enum class ExitCode : int {
    Success = 0,
    Usage = 1,
    AssumptionFailure = 2,
    NumericalFailure = 3,
    IoFailure = 4,
};

/// Invalid arguments, configuration, or call sequence.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The Levy measure violates a standing assumption required by the operation.
class AssumptionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical routine failed to reach its tolerance.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double partial_result, double achieved_error)
        : std::runtime_error(what), partial_result_(partial_result), achieved_error_(achieved_error) {}
    explicit NumericalError(const std::string& what) : NumericalError(what, 0.0, 0.0) {}

    [[nodiscard]] double partial_result() const noexcept { return partial_result_; }
    [[nodiscard]] double achieved_error() const noexcept { return achieved_error_; }

private:
    double partial_result_;
    double achieved_error_;
};

/// Explicit time step exceeds the monotonicity (CFL) bound.
class CflError : public UsageError {
public:
    CflError(const std::string& what, double suggested_dt)
        : UsageError(what), suggested_dt_(suggested_dt) {}

    [[nodiscard]] double suggested_dt() const noexcept { return suggested_dt_; }

private:
    double suggested_dt_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace levy_multiscale
