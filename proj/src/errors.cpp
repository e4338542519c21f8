#include "delaymargin/errors.hpp"

namespace delaymargin {

std::string_view error_name(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::ZeroPolynomial: return "ZeroPolynomial";
    case ErrorKind::DidNotConverge: return "DidNotConverge";
    case ErrorKind::NotProper: return "NotProper";
    case ErrorKind::NotConjugateClosed: return "NotConjugateClosed";
    case ErrorKind::ZeroGain: return "ZeroGain";
    case ErrorKind::PoleEvaluation: return "PoleEvaluation";
    case ErrorKind::DegenerateClosedLoop: return "DegenerateClosedLoop";
    case ErrorKind::PoleZeroCancellation: return "PoleZeroCancellation";
    case ErrorKind::BoundaryClearance: return "BoundaryClearance";
    case ErrorKind::NoIntersection: return "NoIntersection";
    case ErrorKind::RootOnBoundary: return "RootOnBoundary";
    case ErrorKind::NegativeCount: return "NegativeCount";
    case ErrorKind::UnboundedLeavingInterval: return "UnboundedLeavingInterval";
    case ErrorKind::CriticalFrequencyZero: return "CriticalFrequencyZero";
    case ErrorKind::BoundaryRoot: return "BoundaryRoot";
    case ErrorKind::UnboundedRegion: return "UnboundedRegion";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidInput: return "InvalidInput";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(error_name(kind)) + ": " + message), kind_(kind) {}

} // namespace delaymargin
