#pragma once

#include <stdexcept>
#include <string>

namespace bdm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input data: geometry, datasets, edge lists.
class DataError : public Error {
public:
    using Error::Error;
};

/// Inconsistent or out-of-range configuration (model spec, MCMC settings, config keys).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what, std::string key = {})
        : Error(what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Failure while sampling or post-processing draws.
class SamplerError : public Error {
public:
    using Error::Error;
};

}  // namespace bdm
