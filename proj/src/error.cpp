#include "riffle/error.hpp"

namespace riffle {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::OverlappingGaps: return "OverlappingGaps";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::DegenerateGap: return "DegenerateGap";
    case ErrorKind::IncomparableSamples: return "IncomparableSamples";
    case ErrorKind::WindowTooSmall: return "WindowTooSmall";
    case ErrorKind::NotPurelyAtomic: return "NotPurelyAtomic";
    case ErrorKind::ExactUnavailable: return "ExactUnavailable";
    case ErrorKind::CapExceeded: return "CapExceeded";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptyCounts: return "EmptyCounts";
    case ErrorKind::InvalidCoupling: return "InvalidCoupling";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace riffle
