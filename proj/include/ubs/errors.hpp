#pragma once

#include <stdexcept>
#include <string>

namespace ubs {

// All failures surface as typed exceptions derived from Error, so callers
// (CLI, sweep drivers) can map them to exit codes without string matching.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct SingularityError : Error {
    using Error::Error;
};
struct StepError : Error {
    using Error::Error;
};
struct BoundaryError : Error {
    using Error::Error;
};
struct RootBracketError : Error {
    using Error::Error;
};
struct DegenerateBasisError : Error {
    using Error::Error;
};
struct NonPositiveOmegaSqError : Error {
    using Error::Error;
};
struct NegativeQuarticError : Error {
    using Error::Error;
};
struct PhaseBracketError : Error {
    using Error::Error;
};
struct CollisionError : Error {
    using Error::Error;
};
struct CutoffError : Error {
    using Error::Error;
};
struct DomainError : Error {
    using Error::Error;
};
struct DimensionError : Error {
    using Error::Error;
};
struct UnsupportedOpError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace ubs
