#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riffle/io.hpp"

namespace riffle {

struct CheckResult {
  std::string name;
  bool passed = true;
  bool skipped = false;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  /// Draws per statistical check.
  std::uint64_t samples = 100000;
  /// Exact checks run for n = 2..max_n.
  std::size_t max_n = 4;
  double alpha = stats::kAlphaSuite;
};

struct VerifyReport {
  std::string measure;
  std::vector<CheckResult> checks;

  bool passed() const;
  std::vector<std::string> failures() const;
};

/// Runs the property suite on a resolved measure. A candidate that fails the
/// quasi-uniform gate stops there; everything else is skipped.
VerifyReport verify_measure(const io::ResolvedMeasure& measure, const VerifyOptions& options);

io::Json to_json(const VerifyReport& report);

}  // namespace riffle
