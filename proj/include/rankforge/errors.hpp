#pragma once

#include <stdexcept>
#include <string>

namespace rankforge {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularCurve : Error {
    SingularCurve() : Error("singular curve: discriminant is zero") {}
};

struct InvalidInvariants : Error {
    using Error::Error;
};

struct PointNotOnCurve : Error {
    using Error::Error;
};

struct DegeneratePair : Error {
    DegeneratePair() : Error("degenerate pair: x1 == x2") {}
};

struct PrecisionFailure : Error {
    using Error::Error;
};

struct GenerationFailure : Error {
    using Error::Error;
};

struct InsufficientModuli : Error {
    using Error::Error;
};

struct InsufficientData : Error {
    using Error::Error;
};

struct DomainError : Error {
    using Error::Error;
};

struct ConfigMismatch : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

} // namespace rankforge
