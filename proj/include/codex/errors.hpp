#pragma once

#include <stdexcept>
#include <string>

namespace codex {

/// Invalid user-supplied configuration (bad parameters, mismatched shapes in input files).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A solver left its safe operating range (divergence, non-finite values).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace codex
