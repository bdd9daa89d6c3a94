#pragma once

#include <stdexcept>
#include <string>

namespace rfsense {

// Base class for all library errors. The CLI maps these onto exit codes:
// IoError -> 2, everything else -> 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input value outside an operation's mathematical domain.
class DomainError : public Error {
public:
    using Error::Error;
};

// Malformed text input (trace rows, BSSIDs, JSON documents).
class ParseError : public Error {
public:
    using Error::Error;
};

// Structurally well-formed input that violates a documented constraint.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Timestamps went backwards (or repeated) within one BSSID stream.
class SequencingError : public Error {
public:
    using Error::Error;
};

// Not enough samples to establish a baseline.
class CalibrationError : public Error {
public:
    using Error::Error;
};

// Filesystem / stream failures.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace rfsense
