#pragma once

#include <stdexcept>
#include <string>

namespace tdelab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model returned a non-finite term, or was built from non-physical parameters.
class ModelError : public Error {
public:
    using Error::Error;
};

/// A matrix that must be inverted is singular or too ill-conditioned.
class ConditioningError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Ultimate-bound margin is invalid (beta outside (0, lambda_min(K))).
class InvalidMarginError : public Error {
public:
    using Error::Error;
};

/// Delayed sample requested off the history grid or outside the stored window.
class HistoryError : public Error {
public:
    using Error::Error;
};

/// Scenario/configuration problem. `field()` names the offending key path.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace tdelab
