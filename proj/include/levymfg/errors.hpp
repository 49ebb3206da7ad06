#pragma once

#include <stdexcept>
#include <string>

namespace mfg {

// Thrown for malformed or invalid configuration; the CLI maps it to exit 1.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Solver failed to converge; CLI exit 2.
struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Monte Carlo budget insufficient for the requested estimate; CLI exit 3.
struct BudgetError : std::runtime_error {
    explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mfg
