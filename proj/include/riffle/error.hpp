#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace riffle {

enum class ErrorKind {
  OverlappingGaps,
  OutOfRange,
  DegenerateGap,
  IncomparableSamples,
  WindowTooSmall,
  NotPurelyAtomic,
  ExactUnavailable,
  CapExceeded,
  DimensionMismatch,
  EmptyCounts,
  InvalidCoupling,
  InvalidSpec,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so that
/// callers (the CLI, the Python layer) can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace riffle
