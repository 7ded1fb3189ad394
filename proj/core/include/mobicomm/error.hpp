#pragma once

#include <stdexcept>
#include <string>

namespace mobicomm {

/// Failure categories. The CLI maps them onto process exit codes.
enum class ErrorKind {
    Config,     // invalid configuration or arguments
    Data,       // unreadable or malformed input
    Domain,     // a precondition on values was violated
    Numerical,  // non-finite results, solver breakdown, no convergence
    Internal,   // an invariant of this library was broken
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class InternalError : public Error {
public:
    explicit InternalError(const std::string& what) : Error(ErrorKind::Internal, what) {}
};

}  // namespace mobicomm
