#pragma once

#include <stdexcept>
#include <string>

namespace mdla {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct RangeError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

// carries the achieved residual of a failed numerical procedure
struct NumericError : std::runtime_error {
    NumericError(const std::string& what, double residual = 0.0)
        : std::runtime_error(what), residual(residual) {}
    double residual;
};

struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

}  // namespace mdla
