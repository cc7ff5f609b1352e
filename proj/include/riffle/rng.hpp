#pragma once

#include <cstdint>
#include <random>

namespace riffle {

/// Seeded random stream. Output is bit-reproducible across platforms: the
/// engine is mt19937_64 and the conversions to [0,1) are done here rather
/// than through the implementation-defined std distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Uniform on the dyadic grid {k / 2^53 : 0 <= k < 2^53}.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound), by rejection (no modulo bias).
  std::uint64_t below(std::uint64_t bound);

  std::uint64_t next() { return engine_(); }

  std::uint64_t seed() const noexcept { return seed_; }

  /// Independent child stream number `stream`; deterministic in (seed, stream).
  Rng split(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace riffle
