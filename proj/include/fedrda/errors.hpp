#pragma once
#include <stdexcept>
#include <string>

namespace fedrda {

// Argument/config family: caller handed us something invalid. The CLI maps
// these to exit code 2.
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct ShapeError : ArgumentError {
    using ArgumentError::ArgumentError;
};
struct FormatError : ArgumentError {
    using ArgumentError::ArgumentError;
};
struct ConfigError : ArgumentError {
    using ArgumentError::ArgumentError;
};
struct TooFewClientsError : ArgumentError {
    using ArgumentError::ArgumentError;
};

// Runtime family: inputs were valid but execution could not proceed. Exit
// code 3 at the CLI boundary.
struct RuntimeFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct AggregationError : RuntimeFailure {
    using RuntimeFailure::RuntimeFailure;
};
struct DegenerateVectorError : RuntimeFailure {
    using RuntimeFailure::RuntimeFailure;
};

} // namespace fedrda
