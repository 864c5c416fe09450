#pragma once

#include <stdexcept>
#include <string>

namespace qbl {

// Invalid experiment, instance, or parameter-regime configuration.
// The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Out-of-domain argument to a numeric routine.
struct InputError : std::invalid_argument {
    explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// Requested analysis is undefined for the given instance family.
struct AnalysisError : std::runtime_error {
    explicit AnalysisError(const std::string& what) : std::runtime_error(what) {}
};

// Attempt to aggregate runs from mismatched configurations.
struct AggregationError : std::runtime_error {
    explicit AggregationError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem failure. The CLI maps this to exit code 3.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qbl
