#pragma once

#include <stdexcept>
#include <string>

namespace sepvote {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input file (bad header, bad token, wrong field count, ...).
class FormatError : public Error {
public:
    explicit FormatError(const std::string& msg) : Error(msg) {}
};

/// Structurally valid data that violates a pipeline contract
/// (coverage mismatch, length mismatch, degenerate normalization, ...).
class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(msg) {}
};

/// Invalid configuration value.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

} // namespace sepvote
