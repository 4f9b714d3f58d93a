#pragma once

#include <stdexcept>
#include <string>

namespace foldbox {

/// Base of every error raised by the library. Adapters (CLI, HTTP) map
/// subclasses to exit codes and status codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for inputs the caller could have checked: wrong universe,
/// unknown ids, malformed files.
class UsageError : public Error {
public:
    using Error::Error;
};

class UniverseMismatch : public UsageError {
public:
    UniverseMismatch() : UsageError("operands live in different symbol universes") {}
};

class NotIncluded : public UsageError {
public:
    NotIncluded() : UsageError("multiset difference undefined: subtrahend not included") {}
};

class Overflow : public Error {
public:
    Overflow() : Error("token count overflow") {}
};

class UnknownId : public UsageError {
public:
    using UsageError::UsageError;
};

class NotEnabled : public UsageError {
public:
    using UsageError::UsageError;
};

class BadChoice : public UsageError {
public:
    using UsageError::UsageError;
};

class EndpointMismatch : public UsageError {
public:
    using UsageError::UsageError;
};

class TypeMismatch : public UsageError {
public:
    using UsageError::UsageError;
};

class ShapeMismatch : public UsageError {
public:
    using UsageError::UsageError;
};

class SchemaError : public UsageError {
public:
    using UsageError::UsageError;
};

class AnalysisIncomplete : public UsageError {
public:
    using UsageError::UsageError;
};

/// An invariant the library promises never to break; maps to exit code 2.
class InternalError : public Error {
public:
    using Error::Error;
};

} // namespace foldbox
