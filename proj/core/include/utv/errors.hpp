#pragma once

#include <stdexcept>
#include <string>

namespace utv {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& message) : std::runtime_error(message) {}
};

// Malformed input file (bad line, unknown token, duplicate key).
class ParseError : public Error {
public:
    explicit ParseError(const std::string& message) : Error(message) {}
};

// A value outside its contract (rating out of range, bad fraction,
// zero-vector similarity, recommendation outside the universe).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& message) : Error(message) {}
};

// Lookup of an id that is not present in a table.
class NotFoundError : public Error {
public:
    explicit NotFoundError(const std::string& message) : Error(message) {}
};

// A request that exceeds a hard size limit (dense adjacency export).
class CapacityError : public Error {
public:
    explicit CapacityError(const std::string& message) : Error(message) {}
};

// Non-finite values produced during numeric work (training divergence).
class NumericError : public Error {
public:
    explicit NumericError(const std::string& message) : Error(message) {}
};

// Invalid or inconsistent pipeline configuration.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error(message) {}
};

// A pipeline stage invoked before its predecessor produced its artifacts.
class StageOrderError : public Error {
public:
    explicit StageOrderError(const std::string& message) : Error(message) {}
};

}  // namespace utv
