#pragma once

#include <stdexcept>
#include <string>

namespace sdr {

// Configuration / input validation problems (CLI exit code 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures during a run (CLI exit code 3).
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
    NumericalError(const std::string& msg, double t)
        : std::runtime_error(msg + " (at t = " + std::to_string(t) + " s)"), time(t) {}
    double time = -1.0;
};

}  // namespace sdr
