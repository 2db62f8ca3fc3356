#pragma once

#include <stdexcept>
#include <string>

namespace kbahc {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or arguments (bad parameter domains, unknown keys).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed or unusable input data.
class DataError : public Error {
public:
    using Error::Error;
};

/// No asset satisfies the availability rule for a window.
class EmptyUniverseError : public DataError {
public:
    using DataError::DataError;
};

/// Numerical failure: singular matrix, non-finite values, non-convergence.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace kbahc
