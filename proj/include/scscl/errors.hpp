#pragma once

#include <stdexcept>
#include <string>

namespace scscl {

// Bad shapes, bad configs, malformed input files. CLI maps this to exit 2.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Non-finite or exploding loss during training. CLI maps this to exit 3.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

// A self-check (gradient check, invariant assertion) failed. CLI maps this to exit 4.
class VerificationError : public std::runtime_error {
public:
    explicit VerificationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace scscl
