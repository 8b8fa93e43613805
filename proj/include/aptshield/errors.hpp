#pragma once

#include <stdexcept>
#include <string>

namespace aptshield {

// Base class for all toolkit errors. Subclasses map onto CLI exit codes:
// shape/data/domain/not-found -> 2, numeric -> 3, config/usage -> 1.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Matrix or vector dimensions do not conform.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// Malformed or inconsistent input data (files, records, cells).
class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(msg) {}
};

// Argument outside an operation's domain (empty input, value out of range).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

// Non-finite value produced or encountered during computation.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

// Invalid run configuration (unknown key, value out of range).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// A requested entity does not exist (host, node, chain target).
class NotFoundError : public Error {
public:
    explicit NotFoundError(const std::string& msg) : Error(msg) {}
};

}  // namespace aptshield
