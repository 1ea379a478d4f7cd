#pragma once

#include <stdexcept>
#include <string>

namespace smallforms {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user input: malformed config, out-of-range parameter, invalid file.
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// A search or scan would exceed the configured work budget.
struct WorkLimitError : Error {
    explicit WorkLimitError(const std::string& msg) : Error(msg) {}
};

// Floating accumulator left the representable range.
struct OverflowError : Error {
    explicit OverflowError(const std::string& msg) : Error(msg) {}
};

// Structurally unusable input: dependent coordinates, singular matrix,
// identically-zero form.
struct DegenerateInputError : Error {
    explicit DegenerateInputError(const std::string& msg) : Error(msg) {}
};

// A search that is guaranteed to succeed only asymptotically came up empty.
struct WitnessNotFoundError : Error {
    explicit WitnessNotFoundError(const std::string& msg) : Error(msg) {}
};

}  // namespace smallforms
