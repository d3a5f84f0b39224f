#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace esle {

// Invalid physical argument (negative frequency, tau outside [0, beta*hbar], ...).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Bad or inconsistent run configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Frequency quadrature failed to meet its accuracy target.
struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Spectral factorization found a kernel that is not even approximately
// positive semidefinite on the sampling grid.
struct FactorizationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A single stochastic trajectory produced a non-finite or runaway matrix.
struct TrajectoryDiverged : std::runtime_error {
    std::size_t step;
    TrajectoryDiverged(const std::string& what, std::size_t step_index)
        : std::runtime_error(what), step(step_index) {}
};

struct EnsembleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace esle
