#pragma once

#include <stdexcept>
#include <string>

namespace dmc {

/// Base for every fatal simulation error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A state quantity became NaN or infinite.
class NumericError : public Error {
public:
    NumericError(const std::string& quantity, long long step, double time)
        : Error("non-finite " + quantity + " at step " + std::to_string(step) +
                " (t=" + std::to_string(time) + " s)"),
          quantity_(quantity), step_(step) {}

    const std::string& quantity() const noexcept { return quantity_; }
    long long step() const noexcept { return step_; }

private:
    std::string quantity_;
    long long step_;
};

/// An open switch saw more than its blocking-voltage rating.
class OverstressError : public Error {
public:
    OverstressError(const std::string& switch_name, double voltage, double limit)
        : Error("device overstress on " + switch_name + ": " + std::to_string(voltage) +
                " V across open switch exceeds " + std::to_string(limit) + " V"),
          voltage_(voltage) {}

    double voltage() const noexcept { return voltage_; }

private:
    double voltage_;
};

class InfeasibleLimitsError : public Error {
public:
    using Error::Error;
};

/// Attenuation of the recorded maximum current did not settle.
class NonConvergenceError : public Error {
public:
    using Error::Error;
};

class CalibrationError : public Error {
public:
    using Error::Error;
};

/// Charging made no progress over the watchdog window.
class StalledRunError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace dmc
