#pragma once

#include <stdexcept>
#include <string>

namespace monofield {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Two fields were combined that do not live on the same grid.
struct GridMismatchError : Error {
    using Error::Error;
};

/// A value left the interval it is contracted to stay in (gluing condition (iii)).
struct RangeViolationError : Error {
    using Error::Error;
};

/// A replacement does not match the surrounding field on interface nodes.
struct InterfaceMismatchError : Error {
    using Error::Error;
};

/// A construction that should preserve monotonicity produced a non-monotone field.
struct MonotonicityViolationError : Error {
    using Error::Error;
};

/// A solver did not reach the requested tolerance or received an unusable region.
struct SolveError : Error {
    using Error::Error;
};

/// A level curve is too close to itself for a tubular strip at this resolution.
struct StripTooTightError : Error {
    using Error::Error;
};

/// Two smoothing strips would overlap.
struct StripCollisionError : Error {
    using Error::Error;
};

/// The field does not have a clean sign pattern next to a level curve.
struct SideClassificationError : Error {
    using Error::Error;
};

/// The normal derivative vanishes where a smoothing profile needs it positive.
struct DegenerateProfileError : Error {
    using Error::Error;
};

/// A deterministic candidate search ran out of budget.
struct SearchExhaustedError : Error {
    using Error::Error;
};

}  // namespace monofield
