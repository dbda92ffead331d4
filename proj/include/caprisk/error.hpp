#pragma once

#include <stdexcept>
#include <string>

namespace caprisk {

// Base class for all recoverable engine errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input content (wrong column count, unparseable field, ...).
class ParseError : public Error {
public:
    using Error::Error;
};

// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Operation needs more observations than the input provides.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

// Result is mathematically undefined for this input (zero denominators).
class UndefinedResultError : public Error {
public:
    using Error::Error;
};

} // namespace caprisk
