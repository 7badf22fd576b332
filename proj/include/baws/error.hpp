#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace baws {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An input lies outside the domain of an operation (empty window, non-finite value).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A tuning parameter is out of range (alpha outside (0,1), zero replications, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

class InsufficientHistory : public DomainError {
public:
    using DomainError::DomainError;
};

/// Malformed data file. `row()` is the 1-based data row (header excluded), 0 if unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t row)
        : Error(row == 0 ? what : what + " (data row " + std::to_string(row) + ")"), row_(row) {}

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace baws
