#pragma once

#include <stdexcept>

namespace isapt {

/// Invalid or inconsistent configuration; carries the offending key path in its message.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The sensing requirement cannot be met for any admissible pulse duration or realization.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The inner solver failed on every grid point.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace isapt
