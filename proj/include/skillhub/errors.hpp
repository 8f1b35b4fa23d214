#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace skillhub {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed query string. `offset` is the character offset of the problem.
class QueryParseError : public Error {
public:
    QueryParseError(const std::string& message, std::size_t offset)
        : Error(message + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Manifest, index or store file that cannot be read back.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Bad argument or configuration value.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Transient embedding provider failure; the caller may retry later.
class ProviderError : public Error {
public:
    using Error::Error;
};

/// Vector dimension disagrees with the index fingerprint.
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

}  // namespace skillhub
