#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "riffle/distribution.hpp"
#include "riffle/measure.hpp"
#include "riffle/oracle.hpp"
#include "riffle/permutation.hpp"
#include "riffle/rng.hpp"

namespace riffle {

/// x -> slope * x + intercept on [lo, hi).
struct AffinePiece {
  Rational lo, hi;
  Rational slope, intercept;

  Rational operator()(const Rational& x) const { return slope * x + intercept; }
  friend bool operator==(const AffinePiece&, const AffinePiece&) = default;
};

/// Piecewise-affine, Lebesgue-measure-preserving map of [0,1].
/// Pieces are right-continuous at interior breakpoints; the last piece also
/// owns x = 1.
class ShuffleMap {
 public:
  /// Throws Error(InvalidCoupling) unless the pieces tile [0,1], have nonzero
  /// slopes, map into [0,1] and preserve Lebesgue measure.
  explicit ShuffleMap(std::vector<AffinePiece> pieces);

  const std::vector<AffinePiece>& pieces() const noexcept { return pieces_; }
  std::size_t piece_index(const Rational& x) const;
  std::size_t piece_index(double x) const;

  Rational operator()(const Rational& x) const;
  double operator()(double x) const;

 private:
  std::vector<AffinePiece> pieces_;
  std::vector<double> lo_approx_;
  std::vector<double> slope_approx_;
  std::vector<double> intercept_approx_;
};

/// For every y off a finite set, sum over pieces whose image covers y of
/// 1/|slope| equals 1. Checked exactly on the induced partition.
bool is_measure_preserving(const std::vector<AffinePiece>& pieces);

/// S(x) = (x - r)/(R - r) on right-atom gaps (r, R) and (L - x)/(L - l) on
/// left-atom gaps (l, L). Throws Error(NotPurelyAtomic) if Leb(F) > 0.
ShuffleMap shuffle_map_from_measure(const QuasiUniformMeasure& mu);

/// m x m nonnegative cell probabilities with every row and column summing to
/// 1/m: u and v are uniform inside the chosen cell.
class GridCopula {
 public:
  /// Exact check. Throws Error(InvalidCoupling).
  static GridCopula from_rationals(std::vector<std::vector<Rational>> cells);
  /// Floating-point input: sums must be within `tolerance` of 1/m.
  static GridCopula from_doubles(const std::vector<std::vector<double>>& cells, double tolerance = 1e-13);

  std::size_t size() const noexcept { return m_; }
  double cell(std::size_t i, std::size_t j) const { return probs_[i * m_ + j]; }
  /// Cell index (row-major) for a uniform draw.
  std::size_t pick(double u) const;

 private:
  GridCopula(std::size_t m, std::vector<double> probs);
  std::size_t m_;
  std::vector<double> probs_;
  std::vector<double> cumulative_;
};

/// A real coordinate that can be compared exactly. Its value is
/// slope * t + intercept, or t itself when slope is null. Coordinates from
/// the same affine piece compare by t alone.
struct Coordinate {
  double approx = 0.0;
  double t = 0.0;
  const Rational* slope = nullptr;
  const Rational* intercept = nullptr;
  bool increasing = true;
  /// Gap of a nu_mu draw, for the adjacent-gap tie rule.
  const GapInterval* gap = nullptr;

  Rational exact() const;
};

/// Source of pairs (u, v) on [0,1]^2 with both marginals uniform.
class CouplingSampler {
 public:
  enum class Kind { NuMu, NuMuStar, Deterministic, Grid, Mixture };

  /// (U, U X + (1 - U) Y) for a conjugate pair (X, Y) and independent U.
  static CouplingSampler nu_mu(QuasiUniformMeasure mu);
  /// The same pair with coordinates swapped.
  static CouplingSampler nu_mu_star(QuasiUniformMeasure mu);
  static CouplingSampler deterministic(ShuffleMap map);
  static CouplingSampler grid(GridCopula grid);
  /// Picks a component per draw. Throws Error(InvalidCoupling) unless weights
  /// are positive and sum to exactly 1.
  static CouplingSampler mixture(std::vector<std::pair<Rational, CouplingSampler>> components);
  /// u = v: nu_mu of the single right atom at 1.
  static CouplingSampler identity();

  Kind kind() const;
  /// NuMu / NuMuStar only.
  const QuasiUniformMeasure& measure() const;
  /// Deterministic only.
  const ShuffleMap& map() const;
  /// Grid only.
  const GridCopula& grid_copula() const;
  /// Mixture only.
  const std::vector<std::pair<Rational, CouplingSampler>>& components() const;

  struct Impl;

 private:
  explicit CouplingSampler(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
  friend struct CouplingAccess;
};

struct CouplingDraw {
  double u = 0.0;
  double v = 0.0;
  Coordinate u_coord;
  Coordinate v_coord;
  /// Conjugate pair behind a NuMu / NuMuStar draw.
  std::optional<ConjugateSample> pair;
  /// Path of component choices through nested mixtures (empty otherwise).
  std::vector<std::size_t> components;
};

CouplingDraw draw_coupling(const CouplingSampler& sampler, Rng& rng);

struct CardRecord {
  int label = 0;
  double u = 0.0;
  double v = 0.0;
  std::optional<ConjugateSample> pair;
  std::optional<std::size_t> tie_gap;
};

/// One shuffle of n cards: `initial` and `final_order` are the deck states
/// (label -> position) from the u- and v-orders and sigma = final * initial^-1
/// maps initial positions to final positions.
struct StepOutcome {
  std::vector<CardRecord> cards;
  Permutation initial;
  Permutation final_order;
  Permutation sigma;
  /// Exact v-ties that the tie rules had to settle.
  std::size_t ties_resolved = 0;
};

StepOutcome step_permutation(std::size_t n, const CouplingSampler& sampler, Rng& rng);

/// Reusable step sampler that only produces sigma's lexicographic index.
class StepSampler {
 public:
  StepSampler(CouplingSampler sampler, std::size_t n);
  std::uint64_t draw_lex(Rng& rng);
  Permutation draw(Rng& rng);

 private:
  void draw_into(Rng& rng);
  CouplingSampler sampler_;
  std::size_t n_;
  std::vector<CouplingDraw> draws_;
  std::vector<std::size_t> by_u_;
  std::vector<std::size_t> by_v_;
  std::vector<int> u_rank_;
  std::vector<int> sigma_;
};

/// rho_{h+1} = sigma_{h+1} * rho_h with i.i.d. steps; returns rho_0..rho_H.
std::vector<Permutation> walk(std::size_t n, const CouplingSampler& sampler, std::size_t steps, Rng& rng,
                              std::optional<Permutation> start = std::nullopt);

/// Affine-segment form of a sampler, for the exact route. Throws
/// Error(ExactUnavailable) for diffuse measures and grid copulas.
std::vector<oracle::Segment> to_segments(const CouplingSampler& sampler);

/// Step law sigma at the identity (one row of the kernel on S_n; the rest is
/// K(rho, sigma rho) = K(id, sigma)).
PermutationDistribution kernel_row_exact(std::size_t n, const CouplingSampler& sampler, oracle::Caps caps = {});
PermutationDistribution kernel_row_monte_carlo(std::size_t n, const CouplingSampler& sampler, std::uint64_t samples,
                                               Rng& rng);
std::vector<std::uint64_t> step_counts(std::size_t n, const CouplingSampler& sampler, std::uint64_t samples, Rng& rng);

}  // namespace riffle
