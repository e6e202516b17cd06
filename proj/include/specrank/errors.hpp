#pragma once

#include <stdexcept>
#include <string>

namespace specrank {

// Error taxonomy. The CLI maps validation-type errors to exit code 1 and
// numeric/fit failures to exit code 2.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad input data or a violated contract (winner outside the set, duplicate
// items in a ranking, mismatched item universes, ...).
struct ValidationError : Error {
    using Error::Error;
};

// Malformed text input; carries the 1-based line number.
struct ParseError : ValidationError {
    ParseError(std::size_t line, const std::string& what)
        : ValidationError("line " + std::to_string(line) + ": " + what), line(line) {}
    std::size_t line;
};

// A caller-supplied argument is out of range (alpha outside (0,1), empty
// item set, d too small, unsupported configuration, ...).
struct ParameterError : Error {
    using Error::Error;
};

// A synthetic-data generator could not produce a dataset.
struct GenerationError : Error {
    using Error::Error;
};

// Numerical failure: non-convergence, vanishing variance, log of a
// denormal stationary mass.
struct NumericError : Error {
    using Error::Error;
};

// The dataset cannot be fit (rankability failure, disconnected win-graph).
struct FitError : Error {
    using Error::Error;
};

} // namespace specrank
