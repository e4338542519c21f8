#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace delaymargin {

enum class ErrorKind {
    ZeroPolynomial,
    DidNotConverge,
    NotProper,
    NotConjugateClosed,
    ZeroGain,
    PoleEvaluation,
    DegenerateClosedLoop,
    PoleZeroCancellation,
    BoundaryClearance,
    NoIntersection,
    RootOnBoundary,
    NegativeCount,
    UnboundedLeavingInterval,
    CriticalFrequencyZero,
    BoundaryRoot,
    UnboundedRegion,
    InvalidArgument,
    InvalidInput,
};

std::string_view error_name(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (the CLI in
// particular) can report the module-level error name.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }
    std::string_view name() const { return error_name(kind_); }

private:
    ErrorKind kind_;
};

} // namespace delaymargin
