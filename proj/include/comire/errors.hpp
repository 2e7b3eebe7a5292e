#pragma once

#include <stdexcept>
#include <string>

namespace comire {

// Error taxonomy. Every library failure is one of these; the CLI maps them
// to exit codes.

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of an operation (x < 0 for a dose,
// nonpositive rate, empty categorical, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// A structural invariant of a value was broken (weights off the simplex,
// adversity restriction violated, ...).
struct InvariantError : std::logic_error {
    using std::logic_error::logic_error;
};

// Floating point breakdown: vanishing normalizers, truncation regions with
// no representable mass.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad input data (non-finite responses, malformed CSV rows).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Caller asked for something that makes no sense (empty draw set, zero
// replicates, unknown scenario id).
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// R_A(inf, a) <= 0: the threshold does not separate the extremal densities.
struct ModelDegeneracyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace comire
