#include "riffle/distribution.hpp"

#include "riffle/error.hpp"

namespace riffle {

namespace {

/// Lex-index multiplication table: table[a * N + b] = lex(a * b).
std::vector<std::uint32_t> product_table(std::size_t n) {
  const auto perms = all_permutations(n);
  const std::size_t count = perms.size();
  std::vector<std::uint32_t> table(count * count);
  for (std::size_t a = 0; a < count; ++a)
    for (std::size_t b = 0; b < count; ++b)
      table[a * count + b] = static_cast<std::uint32_t>((perms[a] * perms[b]).lex_index());
  return table;
}

}  // namespace

PermutationDistribution::PermutationDistribution(std::size_t n) : n_(n) {
  if (n == 0 || n > kMaxDenseN)
    throw Error(ErrorKind::CapExceeded, "dense permutation distribution needs 1 <= n <= " + std::to_string(kMaxDenseN));
  probs_.assign(factorial(n), Rational(0));
}

PermutationDistribution PermutationDistribution::uniform(std::size_t n) {
  PermutationDistribution d(n);
  const Rational each(1, factorial(n));
  for (auto& p : d.probs_) p = each;
  return d;
}

PermutationDistribution PermutationDistribution::point_mass(const Permutation& p) {
  PermutationDistribution d(p.size());
  d.probs_[p.lex_index()] = 1;
  return d;
}

PermutationDistribution PermutationDistribution::from_counts(std::size_t n, const std::vector<std::uint64_t>& counts) {
  PermutationDistribution d(n);
  if (counts.size() != d.probs_.size()) throw Error(ErrorKind::DimensionMismatch, "count vector does not match n!");
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) throw Error(ErrorKind::EmptyCounts, "no samples");
  for (std::size_t i = 0; i < counts.size(); ++i) {
    d.probs_[i] = Rational(mpz_class(static_cast<unsigned long>(counts[i])), mpz_class(static_cast<unsigned long>(total)));
    d.probs_[i].canonicalize();
  }
  return d;
}

Rational PermutationDistribution::total() const {
  Rational s(0);
  for (const auto& p : probs_) s += p;
  return s;
}

PermutationDistribution PermutationDistribution::inverted() const {
  PermutationDistribution d(n_);
  for (std::uint64_t i = 0; i < probs_.size(); ++i) {
    if (probs_[i] == 0) continue;
    d.add(Permutation::from_lex_index(n_, i).inverse(), probs_[i]);
  }
  return d;
}

PermutationDistribution PermutationDistribution::marginal_prefix(std::size_t m) const {
  if (m == 0 || m > n_) throw Error(ErrorKind::DimensionMismatch, "marginal size out of range");
  PermutationDistribution d(m);
  for (std::uint64_t i = 0; i < probs_.size(); ++i) {
    if (probs_[i] == 0) continue;
    d.add(Permutation::from_lex_index(n_, i).restrict_to_prefix(m), probs_[i]);
  }
  return d;
}

PermutationDistribution PermutationDistribution::convolve_left(const PermutationDistribution& other) const {
  if (other.n_ != n_) throw Error(ErrorKind::DimensionMismatch, "convolving distributions on different S_n");
  const std::size_t count = probs_.size();
  PermutationDistribution d(n_);
  if (n_ > 6) {
    for (std::size_t a = 0; a < count; ++a) {
      if (probs_[a] == 0) continue;
      const auto pa = Permutation::from_lex_index(n_, a);
      for (std::size_t b = 0; b < count; ++b)
        if (other.probs_[b] != 0) d.add(pa * Permutation::from_lex_index(n_, b), probs_[a] * other.probs_[b]);
    }
    return d;
  }
  static thread_local std::vector<std::vector<std::uint32_t>> tables(7);
  auto& table = tables[n_];
  if (table.empty()) table = product_table(n_);
  for (std::size_t a = 0; a < count; ++a) {
    if (probs_[a] == 0) continue;
    for (std::size_t b = 0; b < count; ++b) {
      if (other.probs_[b] == 0) continue;
      d.probs_[table[a * count + b]] += probs_[a] * other.probs_[b];
    }
  }
  return d;
}

std::map<Permutation, Rational> PermutationDistribution::nonzero() const {
  std::map<Permutation, Rational> out;
  for (std::uint64_t i = 0; i < probs_.size(); ++i)
    if (probs_[i] != 0) out.emplace(Permutation::from_lex_index(n_, i), probs_[i]);
  return out;
}

}  // namespace riffle
