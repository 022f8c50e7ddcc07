#pragma once

#include <stdexcept>

namespace bletag {

/// Base for failures of the task itself (as opposed to bad arguments or
/// broken inputs). CLI maps these to a distinct exit code.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A generation/search ran out of feasible candidates.
struct CapacityError : DomainError {
    using DomainError::DomainError;
};

/// A sweep contained no detection to estimate a bearing from.
struct NoBearingError : DomainError {
    using DomainError::DomainError;
};

/// Malformed or truncated file contents.
struct CorruptFileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Request outside the supported parameter envelope.
struct UnsupportedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace bletag
