#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "riffle/distribution.hpp"
#include "riffle/measure.hpp"
#include "riffle/ordering.hpp"

namespace riffle::oracle {

struct Caps {
  std::size_t max_n = 6;
  std::size_t max_cells = 8;
};

/// Finite state space for one card: diffuse stretches of F and atom cells,
/// in the order the pairwise rule ranks cards across cells.
struct Cell {
  enum class Kind { Diffuse, Atom };
  Kind kind = Kind::Diffuse;
  Rational mass;
  /// Sort key: (X, Y) for an atom cell; the segment midpoint twice for a
  /// diffuse stretch.
  Rational key_x;
  Rational key_y;
  /// Atom cells only.
  std::size_t gap = 0;
  AtomSide side = AtomSide::Right;
};

class CellDecomposition {
 public:
  explicit CellDecomposition(const QuasiUniformMeasure& mu);
  const std::vector<Cell>& cells() const noexcept { return cells_; }

 private:
  std::vector<Cell> cells_;
};

/// Exact law of the order the construction puts on n labelled cards, by
/// enumerating every assignment of cards to cells. Throws Error(CapExceeded).
PermutationDistribution exact_ordering_distribution(const QuasiUniformMeasure& mu, std::size_t n, Caps caps = {});

/// Same law computed on an arbitrary increasing label set; only the natural
/// order of the labels enters, which is the point of computing it this way.
PermutationDistribution exact_ordering_distribution(const QuasiUniformMeasure& mu, const LabelSet& labels,
                                                    Caps caps = {});

/// Mixture: weighted sum of the component laws.
PermutationDistribution exact_ordering_distribution(const MeasureMixture& mixture, std::size_t n, Caps caps = {});

enum class ShuffleType { One, Two };

/// Type one: the ordering law read as the step law. Type two: its image
/// under sigma -> sigma^{-1}.
PermutationDistribution exact_step_distribution(const QuasiUniformMeasure& mu, std::size_t n, ShuffleType type,
                                                Caps caps = {});

/// Half the L1 distance. Throws Error(DimensionMismatch) for different n.
Rational tv_distance(const PermutationDistribution& p, const PermutationDistribution& q);

/// TV to uniform of the walk started at the identity after h = 0..steps
/// steps, computed from exact powers of the step law.
std::vector<Rational> mixing_curve(const PermutationDistribution& step, std::size_t steps);
std::vector<Rational> mixing_curve(const QuasiUniformMeasure& mu, std::size_t n, ShuffleType type, std::size_t steps,
                                   Caps caps = {});

/// Row and column sums of the n! x n! matrix K(rho, sigma rho) = step(sigma).
struct StochasticityReport {
  std::vector<Rational> row_sums;
  std::vector<Rational> column_sums;
  bool doubly_stochastic = false;
};
StochasticityReport kernel_stochasticity(const PermutationDistribution& step);

/// A coupling on [0,1]^2 that is a finite sum of weighted affine segments:
/// with weight w, (u, v) = (u_lo + t (u_hi - u_lo), v_lo + s (v_hi - v_lo))
/// where t is uniform and s = t (increasing) or 1 - t (decreasing).
struct Segment {
  Rational u_lo, u_hi;
  Rational v_lo, v_hi;
  bool increasing = true;
  Rational weight;
};

/// Exact law of the step permutation (initial u-rank -> final v-rank) for n
/// cards under a segment coupling. Needs that, after refinement, every
/// u-cell carries a single segment or every v-cell does; otherwise throws
/// Error(ExactUnavailable). Throws Error(InvalidCoupling) if a marginal is
/// not uniform.
PermutationDistribution exact_segment_step_distribution(std::span<const Segment> segments, std::size_t n,
                                                        Caps caps = {});

}  // namespace riffle::oracle
