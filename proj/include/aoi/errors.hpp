#pragma once

#include <stdexcept>
#include <string>

namespace aoi {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A configuration value violates its invariant. `key()` is the dotted path
/// of the offending entry (e.g. "env.success_prob") when known.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message, std::string key = {})
        : Error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Scheduler picked a node that does not exist.
class ActionError : public Error {
public:
    using Error::Error;
};

/// Operation called in the wrong lifecycle state (e.g. step after done).
class LifecycleError : public Error {
public:
    using Error::Error;
};

/// Vector or parameter shapes do not match.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Caller misuse that is not a shape problem (empty trace, mismatched reports).
class UsageError : public Error {
public:
    using Error::Error;
};

} // namespace aoi
