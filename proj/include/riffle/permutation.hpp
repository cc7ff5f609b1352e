#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace riffle {

/// A permutation of {1..n} in one-line notation: image(k) is where k goes.
///
/// For a deck state, image(k) is the position of the card labelled k. Steps
/// act on positions and compose on the left: a step s moves a deck from rho
/// to s * rho, where (s * rho)(k) = s(rho(k)).
class Permutation {
 public:
  Permutation() = default;

  /// Identity on {1..n}.
  static Permutation identity(std::size_t n);

  /// One-line images, 1-based. Throws Error(InvalidSpec) if not a bijection.
  static Permutation from_images(std::vector<int> images);

  /// Inverse of lex_index.
  static Permutation from_lex_index(std::size_t n, std::uint64_t index);

  /// "2134" for n <= 9, "10,2,1,..." beyond.
  static Permutation parse(std::string_view text);

  std::size_t size() const noexcept { return images_.size(); }

  /// 1-based: k in [1, n].
  int operator()(int k) const { return images_[static_cast<std::size_t>(k - 1)]; }

  std::span<const int> images() const noexcept { return images_; }

  Permutation inverse() const;

  /// Rank in lexicographic order of one-line notation, in [0, n!).
  std::uint64_t lex_index() const;

  bool is_identity() const;

  std::string to_string() const;

  /// Order induced on the first m labels, re-ranked into {1..m}.
  Permutation restrict_to_prefix(std::size_t m) const;

  friend Permutation operator*(const Permutation& outer, const Permutation& inner);
  friend auto operator<=>(const Permutation&, const Permutation&) = default;
  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  explicit Permutation(std::vector<int> images) : images_(std::move(images)) {}
  std::vector<int> images_;
};

std::uint64_t factorial(std::size_t n);

/// Lex index of a one-line permutation given as 0-based ranks (no validation).
std::uint64_t lex_index_of_ranks(std::span<const int> zero_based);

/// All permutations of {1..n} in lexicographic order.
std::vector<Permutation> all_permutations(std::size_t n);

/// Ranking of values: out[i] = 1 + #{j : before(values[j], values[i])}.
/// `before` must be a strict total order on the values.
template <class T, class Less>
std::vector<int> ranks_of(std::span<const T> values, Less before);

}  // namespace riffle

#include <algorithm>
#include <numeric>

namespace riffle {

template <class T, class Less>
std::vector<int> ranks_of(std::span<const T> values, Less before) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return before(values[a], values[b]); });
  std::vector<int> rank(values.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) rank[order[pos]] = static_cast<int>(pos + 1);
  return rank;
}

}  // namespace riffle
