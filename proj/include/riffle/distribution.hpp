#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "riffle/permutation.hpp"
#include "riffle/rational.hpp"

namespace riffle {

/// Exact law on S_n, stored densely by lexicographic index (so n is kept
/// small; the constructor refuses n > kMaxDenseN).
class PermutationDistribution {
 public:
  static constexpr std::size_t kMaxDenseN = 8;

  explicit PermutationDistribution(std::size_t n);

  static PermutationDistribution uniform(std::size_t n);
  static PermutationDistribution point_mass(const Permutation& p);

  /// Frequencies count / total. Counts are indexed by lex index.
  static PermutationDistribution from_counts(std::size_t n, const std::vector<std::uint64_t>& counts);

  std::size_t n() const noexcept { return n_; }
  std::size_t support_size() const noexcept { return probs_.size(); }

  const Rational& at(std::uint64_t lex) const { return probs_[lex]; }
  const Rational& operator[](const Permutation& p) const { return probs_[p.lex_index()]; }

  void add(const Permutation& p, const Rational& mass) { probs_[p.lex_index()] += mass; }
  void add(std::uint64_t lex, const Rational& mass) { probs_[lex] += mass; }

  Rational total() const;

  /// Law of sigma^{-1} when sigma has this law.
  PermutationDistribution inverted() const;

  /// Law of the order induced on labels {1..m}.
  PermutationDistribution marginal_prefix(std::size_t m) const;

  /// Law of sigma * tau with sigma ~ *this and tau ~ other independent.
  PermutationDistribution convolve_left(const PermutationDistribution& other) const;

  /// Nonzero entries keyed by permutation, lexicographic.
  std::map<Permutation, Rational> nonzero() const;

  friend bool operator==(const PermutationDistribution&, const PermutationDistribution&) = default;

 private:
  std::size_t n_;
  std::vector<Rational> probs_;
};

}  // namespace riffle
