#pragma once

#include <stdexcept>
#include <string>

namespace chainprop {

// Base for every error the library raises on a violated precondition.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidParameter : Error {
    using Error::Error;
};

// A node pair that does not qualify for the requested operation
// (e.g. long-link probability for neighbours at distance < 2).
struct InvalidPair : Error {
    using Error::Error;
};

struct OutOfBounds : Error {
    using Error::Error;
};

struct NoSuchEdge : Error {
    using Error::Error;
};

// Argument outside the domain on which a formula is defined.
struct DomainError : Error {
    using Error::Error;
};

// Robust level with honest/adversary ratio exactly 1 (log of 1 in the denominator).
struct SingularityError : DomainError {
    using DomainError::DomainError;
};

struct MismatchError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace chainprop
