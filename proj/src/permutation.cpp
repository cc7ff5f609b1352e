#include "riffle/permutation.hpp"

#include <algorithm>
#include <numeric>

#include "riffle/error.hpp"

namespace riffle {

std::uint64_t factorial(std::size_t n) {
  std::uint64_t f = 1;
  for (std::size_t k = 2; k <= n; ++k) f *= k;
  return f;
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<int> images(n);
  std::iota(images.begin(), images.end(), 1);
  return Permutation(std::move(images));
}

Permutation Permutation::from_images(std::vector<int> images) {
  std::vector<bool> seen(images.size(), false);
  for (int v : images) {
    if (v < 1 || v > static_cast<int>(images.size()) || seen[static_cast<std::size_t>(v - 1)])
      throw Error(ErrorKind::InvalidSpec, "not a permutation of 1..n");
    seen[static_cast<std::size_t>(v - 1)] = true;
  }
  return Permutation(std::move(images));
}

Permutation Permutation::from_lex_index(std::size_t n, std::uint64_t index) {
  if (index >= factorial(n)) throw Error(ErrorKind::OutOfRange, "lex index out of range");
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 1);
  std::vector<int> images;
  images.reserve(n);
  for (std::size_t k = n; k >= 1; --k) {
    const std::uint64_t block = factorial(k - 1);
    const auto pick = static_cast<std::size_t>(index / block);
    index %= block;
    images.push_back(pool[pick]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return Permutation(std::move(images));
}

Permutation Permutation::parse(std::string_view text) {
  std::vector<int> images;
  if (text.find(',') != std::string_view::npos) {
    std::size_t start = 0;
    while (start <= text.size()) {
      auto end = text.find(',', start);
      if (end == std::string_view::npos) end = text.size();
      auto field = text.substr(start, end - start);
      if (field.empty()) throw Error(ErrorKind::InvalidSpec, "empty field in permutation");
      int v = 0;
      for (char c : field) {
        if (c < '0' || c > '9') throw Error(ErrorKind::InvalidSpec, "bad permutation '" + std::string(text) + "'");
        v = v * 10 + (c - '0');
      }
      images.push_back(v);
      start = end + 1;
    }
  } else {
    for (char c : text) {
      if (c < '1' || c > '9') throw Error(ErrorKind::InvalidSpec, "bad permutation '" + std::string(text) + "'");
      images.push_back(c - '0');
    }
  }
  return from_images(std::move(images));
}

Permutation Permutation::inverse() const {
  std::vector<int> inv(images_.size());
  for (std::size_t k = 0; k < images_.size(); ++k) inv[static_cast<std::size_t>(images_[k] - 1)] = static_cast<int>(k + 1);
  return Permutation(std::move(inv));
}

std::uint64_t lex_index_of_ranks(std::span<const int> zero_based) {
  // Lehmer code; n is small so the quadratic count is fine.
  const std::size_t n = zero_based.size();
  std::uint64_t index = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t smaller = 0;
    for (std::size_t j = i + 1; j < n; ++j)
      if (zero_based[j] < zero_based[i]) ++smaller;
    index = index * (n - i) + smaller;
  }
  return index;
}

std::uint64_t Permutation::lex_index() const {
  const std::size_t n = images_.size();
  std::uint64_t index = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t smaller = 0;
    for (std::size_t j = i + 1; j < n; ++j)
      if (images_[j] < images_[i]) ++smaller;
    index = index * (n - i) + smaller;
  }
  return index;
}

bool Permutation::is_identity() const {
  for (std::size_t k = 0; k < images_.size(); ++k)
    if (images_[k] != static_cast<int>(k + 1)) return false;
  return true;
}

std::string Permutation::to_string() const {
  std::string out;
  const bool wide = images_.size() > 9;
  for (std::size_t k = 0; k < images_.size(); ++k) {
    if (wide && k > 0) out += ',';
    out += std::to_string(images_[k]);
  }
  return out;
}

Permutation Permutation::restrict_to_prefix(std::size_t m) const {
  if (m > images_.size()) throw Error(ErrorKind::DimensionMismatch, "prefix longer than permutation");
  std::vector<int> prefix(images_.begin(), images_.begin() + static_cast<std::ptrdiff_t>(m));
  std::vector<int> sorted = prefix;
  std::sort(sorted.begin(), sorted.end());
  for (int& v : prefix)
    v = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin()) + 1;
  return Permutation(std::move(prefix));
}

Permutation operator*(const Permutation& outer, const Permutation& inner) {
  if (outer.size() != inner.size()) throw Error(ErrorKind::DimensionMismatch, "composing permutations of different size");
  std::vector<int> images(inner.size());
  for (std::size_t k = 0; k < inner.size(); ++k) images[k] = outer(inner.images_[k]);
  return Permutation(std::move(images));
}

std::vector<Permutation> all_permutations(std::size_t n) {
  std::vector<Permutation> out;
  out.reserve(factorial(n));
  std::vector<int> images(n);
  std::iota(images.begin(), images.end(), 1);
  do {
    out.push_back(Permutation::from_images(images));
  } while (std::next_permutation(images.begin(), images.end()));
  return out;
}

}  // namespace riffle
