#pragma once

#include <stdexcept>
#include <string>

namespace driftguard {

/// Bad input data: malformed files, dimensionality mismatches, degenerate sets.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or arguments supplied by the caller.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Optimization produced a non-finite value.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace driftguard
