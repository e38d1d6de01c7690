#pragma once

#include <stdexcept>
#include <string>

namespace prefeval {

/// Base class for all harness errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad invocation or configuration (CLI exit code 1).
class UsageError : public Error {
public:
    using Error::Error;
};

/// Invalid or inconsistent data (CLI exit code 2).
class DataError : public Error {
public:
    using Error::Error;
};

/// Judge backend / transport failure (CLI exit code 3).
class BackendError : public Error {
public:
    using Error::Error;
};

} // namespace prefeval
