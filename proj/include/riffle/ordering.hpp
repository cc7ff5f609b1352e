#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "riffle/measure.hpp"
#include "riffle/permutation.hpp"
#include "riffle/rng.hpp"
#include "riffle/stats.hpp"

namespace riffle {

/// Finite, strictly increasing, nonempty set of integer labels.
class LabelSet {
 public:
  /// Throws Error(InvalidSpec) unless strictly increasing and nonempty.
  explicit LabelSet(std::vector<long long> labels);

  /// {lo, lo+1, ..., hi}.
  static LabelSet range(long long lo, long long hi);
  /// {1, ..., n}.
  static LabelSet first(std::size_t n) { return range(1, static_cast<long long>(n)); }

  std::span<const long long> labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }
  long long operator[](std::size_t i) const { return labels_[i]; }

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  std::vector<long long> labels_;
};

/// A strict total order on a label set, stored as ranks: rank[i] is the
/// position (1 = lowest) of labels[i].
struct OrderingSample {
  LabelSet labels;
  std::vector<int> rank;

  /// True iff labels[i] comes before labels[j].
  bool before(std::size_t i, std::size_t j) const { return rank[i] < rank[j]; }
  /// Ranks as a permutation of {1..n} (label i -> its position).
  Permutation as_permutation() const { return Permutation::from_images(rank); }
};

/// Finite mixture of quasi-uniform measures with positive rational weights
/// summing to exactly 1.
class MeasureMixture {
 public:
  struct Component {
    Rational weight;
    QuasiUniformMeasure measure;
  };

  /// Throws Error(InvalidSpec) on nonpositive weights or a total other than 1.
  explicit MeasureMixture(std::vector<Component> components);

  const std::vector<Component>& components() const noexcept { return components_; }

  /// Picks a component index with probability equal to its weight.
  std::size_t pick(Rng& rng) const;

 private:
  std::vector<Component> components_;
  std::vector<Rational> cumulative_;
  std::vector<double> cumulative_approx_;
};

using OrderingSource = std::variant<QuasiUniformMeasure, MeasureMixture>;

/// Condition (1) of the construction: whether card m goes below card n,
/// given their conjugate pairs drawn from mu. Equalities are exact.
/// Throws Error(IncomparableSamples) if m == n.
bool precedes(const QuasiUniformMeasure& mu, const ConjugateSample& sample_m, long long m,
              const ConjugateSample& sample_n, long long n);

/// A sampled ordering together with the conjugate pairs that produced it.
struct OrderingDraw {
  OrderingSample ordering;
  std::vector<ConjugateSample> pairs;
  /// Mixture component used (0 for a plain measure).
  std::size_t component = 0;
};

OrderingDraw sample_ordering_detailed(const OrderingSource& source, const LabelSet& labels, Rng& rng);
OrderingSample sample_ordering(const OrderingSource& source, const LabelSet& labels, Rng& rng);

/// Reusable sampler for many orderings on one label set; avoids per-draw
/// allocation. Not thread-safe; give each thread its own.
class OrderingSampler {
 public:
  OrderingSampler(OrderingSource source, LabelSet labels);

  /// Draws one ordering; the returned ranks stay valid until the next draw.
  std::span<const int> draw(Rng& rng);
  /// Lexicographic index of the drawn ranking in S_n.
  std::uint64_t draw_lex(Rng& rng);

  const LabelSet& labels() const noexcept { return labels_; }

 private:
  OrderingSource source_;
  LabelSet labels_;
  std::vector<ConjugateSample> pairs_;
  std::vector<std::size_t> order_;
  std::vector<int> rank_;
};

struct EmpiricalPosition {
  double x_hat = 0.0;
  double y_hat = 0.0;
  long long window = 0;
  long long target = 0;
  /// The target card's conjugate pair, exposed so callers can compare the
  /// estimates against the truth.
  ConjugateSample card = ConjugateSample::diffuse(0.0);
  double x_true = 0.0;
  double y_true = 0.0;
  std::size_t component = 0;
};

/// One ordering on {-N..N}; x_hat = (1/N) #{k in [-N, n) : k before n} and
/// y_hat = (1/N) #{k in (n, N] : k before n}. Throws Error(WindowTooSmall)
/// when N < |target| + 1.
EmpiricalPosition empirical_positions(const OrderingSource& source, long long target, long long window, Rng& rng);

/// Two-sample chi-square between ranking laws on two label sets of equal
/// size, `samples` orderings each, on independent child streams of rng.
stats::TestReport exchangeability_test(const OrderingSource& source, const LabelSet& first, const LabelSet& second,
                                       std::uint64_t samples, Rng& rng, double alpha = stats::kAlphaSuite);

/// Lex-indexed ranking counts over `samples` draws.
std::vector<std::uint64_t> ranking_counts(const OrderingSource& source, const LabelSet& labels, std::uint64_t samples,
                                          Rng& rng);

}  // namespace riffle
