#pragma once

#include <stdexcept>
#include <string>

namespace smpcfl {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration, bad parameters, malformed files. CLI exit code 2.
struct ConfigError : Error {
    using Error::Error;
};

// Online protocol failure: aborts, deadlocks, share misuse, consumed
// correlated randomness. CLI exit code 3.
struct ProtocolError : Error {
    using Error::Error;
};

// Fixed-point value outside the representable range.
struct EncodeRangeError : Error {
    using Error::Error;
};

// Correlated-randomness pools too small for the requested computation.
struct SetupError : ProtocolError {
    using ProtocolError::ProtocolError;
};

} // namespace smpcfl
