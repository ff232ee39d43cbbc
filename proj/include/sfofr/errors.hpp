#pragma once

#include <stdexcept>
#include <string>

namespace sfofr {

// Invalid dimensions, domains, or other violated preconditions.
class InvalidArgumentError : public std::invalid_argument {
public:
    explicit InvalidArgumentError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Singular systems, non-convergent iterations, degenerate variances.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// File, path, and parsing failures.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sfofr
