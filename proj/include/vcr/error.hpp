#pragma once

#include <stdexcept>
#include <string>

namespace vcr {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input (JSON syntax, wrong field types). Message carries file:line.
class ParseError : public Error {
public:
    using Error::Error;
};

// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Caller broke an operation's precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class ProviderMismatch : public Error {
public:
    using Error::Error;
};

} // namespace vcr
