#pragma once

#include <stdexcept>
#include <string>

namespace nphoton {

/// Invalid input: bad parameters, inconsistent spaces, malformed configs.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed on valid input (singular system,
/// non-convergence, divergence, starved sensor, ...).
class ComputationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace nphoton
