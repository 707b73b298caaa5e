#pragma once

#include <stdexcept>
#include <string>

namespace upspec {

// Error taxonomy shared by the library and the CLI exit-code mapping.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A value violates an operation's domain (bad argument, band mismatch, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Malformed file contents.
class FormatError : public Error {
public:
    using Error::Error;
};

// Inconsistent or unusable configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Filesystem-level failure.
class IoError : public Error {
public:
    using Error::Error;
};

// Numerical failure (non-convergent fit, unstable solve).
class NumericalError : public Error {
public:
    using Error::Error;
};

// The reference envelope is globally indistinguishable from the noise floor.
class ReferenceInvalidError : public DomainError {
public:
    using DomainError::DomainError;
};

} // namespace upspec
