#pragma once

#include <stdexcept>
#include <string>

namespace sgemas {

// Common base so the CLI can catch everything from this library at once.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration value; the message names the offending field.
struct ConfigError : Error {
    using Error::Error;
};

// Missing file, unreadable or unwritable path.
struct IoError : Error {
    using Error::Error;
};

// Malformed input data; the message carries the row number when known.
struct ParseError : Error {
    using Error::Error;
};

// Undefined metric (single-class AUC, degenerate Wilcoxon input).
struct MetricError : Error {
    using Error::Error;
};

// Corrupt frame or invalid engine state, reported with the step index.
struct EngineError : Error {
    using Error::Error;
};

}  // namespace sgemas
