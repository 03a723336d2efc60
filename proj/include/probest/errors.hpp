#pragma once

#include <stdexcept>
#include <string>

namespace probest {

/// Raised by the integrator when a trajectory leaves the valid region
/// (non-finite values or a compartment below -1e-6 percent).
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(double time)
        : std::runtime_error("trajectory diverged at t=" + std::to_string(time)),
          time_(time) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

/// Raised by the chi-square statistic when an expected entry is not positive.
class DegenerateExpectedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by the optimizer when the objective is -inf at the start point and
/// at every initial simplex vertex.
class UnfittableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by the ensemble runner when fewer than two fits survive filtering.
class InsufficientEnsembleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by the survey loader; the message names the offending row and field.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace probest
