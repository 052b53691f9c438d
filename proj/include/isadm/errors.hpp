#pragma once

#include <stdexcept>
#include <string>

namespace isadm {

// Base class for all errors raised by the library. The concrete subclass
// decides the CLI exit code (see tools/).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& message) : std::runtime_error(message) {}
};

// Bad usage or bad run configuration (exit code 1).
class ConfigError : public Error {
public:
    using Error::Error;
};

// A system model failed referential validation (exit code 2).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Malformed or inconsistent input documents: syntax errors, schema
// violations, dangling references, duplicate ids (exit code 3).
class DataError : public Error {
public:
    using Error::Error;
};

// File system or network failures (exit code 4).
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace isadm
