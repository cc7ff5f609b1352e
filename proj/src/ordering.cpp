#include "riffle/ordering.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>

#include "riffle/error.hpp"

namespace riffle {

namespace {

/// A coordinate X or Y of a conjugate pair, comparable exactly: endpoint
/// values carry their rank among the measure's endpoints, diffuse values are
/// exact doubles.
struct Coord {
  double approx;
  int rank;  // -1 for a diffuse value
  const Rational* value;
};

Coord x_coord(const QuasiUniformMeasure& mu, const ConjugateSample& s) {
  if (s.is_diffuse()) return {s.u(), -1, nullptr};
  const auto i = s.gap_index();
  return {mu.atom_approx(i), mu.atom_rank(i), &mu.gap(i).atom()};
}

Coord y_coord(const QuasiUniformMeasure& mu, const ConjugateSample& s) {
  if (s.is_diffuse()) return {s.u(), -1, nullptr};
  const auto i = s.gap_index();
  return {mu.conjugate_end_approx(i), mu.conjugate_end_rank(i), &mu.gap(i).conjugate_end()};
}

int cmp(const Coord& a, const Coord& b) {
  if (a.rank >= 0 && b.rank >= 0) return (a.rank > b.rank) - (a.rank < b.rank);
  // Approximations are truncations of the exact value (or exact), so a strict
  // difference between them is decisive; only equality needs GMP.
  if (a.approx != b.approx) return a.approx < b.approx ? -1 : 1;
  if (a.rank < 0 && b.rank < 0) return 0;
  if (a.rank < 0) return compare_exact(a.approx, *b.value);
  return -compare_exact(b.approx, *a.value);
}

bool precedes_ordered(const QuasiUniformMeasure& mu, const ConjugateSample& lower_label,
                      const ConjugateSample& upper_label) {
  const Coord xm = x_coord(mu, lower_label), xn = x_coord(mu, upper_label);
  const int cx = cmp(xm, xn);
  if (cx < 0) return true;
  const Coord ym = y_coord(mu, lower_label), yn = y_coord(mu, upper_label);
  const int cy = cmp(ym, yn);
  if (cy < 0) return true;
  if (cx == 0 && cy == 0) return cmp(xm, ym) > 0;
  return false;
}

const QuasiUniformMeasure& choose(const OrderingSource& source, Rng& rng, std::size_t& component) {
  if (const auto* mu = std::get_if<QuasiUniformMeasure>(&source)) {
    component = 0;
    return *mu;
  }
  const auto& mix = std::get<MeasureMixture>(source);
  component = mix.pick(rng);
  return mix.components()[component].measure;
}

}  // namespace

LabelSet::LabelSet(std::vector<long long> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw Error(ErrorKind::InvalidSpec, "label set is empty");
  for (std::size_t i = 1; i < labels_.size(); ++i)
    if (labels_[i] <= labels_[i - 1]) throw Error(ErrorKind::InvalidSpec, "labels must be strictly increasing");
}

LabelSet LabelSet::range(long long lo, long long hi) {
  if (hi < lo) throw Error(ErrorKind::InvalidSpec, "empty label range");
  std::vector<long long> labels(static_cast<std::size_t>(hi - lo + 1));
  std::iota(labels.begin(), labels.end(), lo);
  return LabelSet(std::move(labels));
}

MeasureMixture::MeasureMixture(std::vector<Component> components) : components_(std::move(components)) {
  if (components_.empty()) throw Error(ErrorKind::InvalidSpec, "mixture has no components");
  Rational total(0);
  for (const auto& c : components_) {
    if (c.weight <= 0) throw Error(ErrorKind::InvalidSpec, "mixture weights must be positive");
    total += c.weight;
    cumulative_.push_back(total);
    cumulative_approx_.push_back(total.get_d());
  }
  if (total != 1) throw Error(ErrorKind::InvalidSpec, "mixture weights sum to " + to_string(total) + ", not 1");
}

std::size_t MeasureMixture::pick(Rng& rng) const {
  const double u = rng.uniform01();
  for (std::size_t i = 0; i + 1 < cumulative_.size(); ++i) {
    if (u < cumulative_approx_[i]) return i;
    if (u == cumulative_approx_[i] && compare_exact(u, cumulative_[i]) < 0) return i;
  }
  return cumulative_.size() - 1;
}

bool precedes(const QuasiUniformMeasure& mu, const ConjugateSample& sample_m, long long m,
              const ConjugateSample& sample_n, long long n) {
  if (m == n) throw Error(ErrorKind::IncomparableSamples, "a label cannot be compared with itself");
  if (m < n) return precedes_ordered(mu, sample_m, sample_n);
  return !precedes_ordered(mu, sample_n, sample_m);
}

OrderingDraw sample_ordering_detailed(const OrderingSource& source, const LabelSet& labels, Rng& rng) {
  OrderingDraw draw{OrderingSample{labels, {}}, {}, 0};
  const auto& mu = choose(source, rng, draw.component);
  draw.pairs.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) draw.pairs.push_back(sample_conjugate_pair(mu, rng));
  std::vector<std::size_t> idx(labels.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Label values only matter through their natural order, and idx is in
  // that order already.
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return a < b ? precedes_ordered(mu, draw.pairs[a], draw.pairs[b])
                 : !precedes_ordered(mu, draw.pairs[b], draw.pairs[a]);
  });
  draw.ordering.rank.assign(labels.size(), 0);
  for (std::size_t pos = 0; pos < idx.size(); ++pos) draw.ordering.rank[idx[pos]] = static_cast<int>(pos + 1);
#ifndef NDEBUG
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b)
      assert(precedes(mu, draw.pairs[idx[a]], labels[idx[a]], draw.pairs[idx[b]], labels[idx[b]]));
#endif
  return draw;
}

OrderingSample sample_ordering(const OrderingSource& source, const LabelSet& labels, Rng& rng) {
  return sample_ordering_detailed(source, labels, rng).ordering;
}

OrderingSampler::OrderingSampler(OrderingSource source, LabelSet labels)
    : source_(std::move(source)),
      labels_(std::move(labels)),
      pairs_(labels_.size(), ConjugateSample::diffuse(0.0)),
      order_(labels_.size()),
      rank_(labels_.size()) {}

std::span<const int> OrderingSampler::draw(Rng& rng) {
  std::size_t component = 0;
  const auto& mu = choose(source_, rng, component);
  for (auto& p : pairs_) p = sample_conjugate_pair(mu, rng);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
    return a < b ? precedes_ordered(mu, pairs_[a], pairs_[b]) : !precedes_ordered(mu, pairs_[b], pairs_[a]);
  });
  for (std::size_t pos = 0; pos < order_.size(); ++pos) rank_[order_[pos]] = static_cast<int>(pos + 1);
  return rank_;
}

std::uint64_t OrderingSampler::draw_lex(Rng& rng) {
  draw(rng);
  std::uint64_t index = 0;
  const std::size_t n = rank_.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t smaller = 0;
    for (std::size_t j = i + 1; j < n; ++j)
      if (rank_[j] < rank_[i]) ++smaller;
    index = index * (n - i) + smaller;
  }
  return index;
}

EmpiricalPosition empirical_positions(const OrderingSource& source, long long target, long long window, Rng& rng) {
  const long long reach = target < 0 ? -target : target;
  if (window < 1 || window < reach + 1)
    throw Error(ErrorKind::WindowTooSmall, "window " + std::to_string(window) + " does not cover label " +
                                               std::to_string(target) + " with room on both sides");
  EmpiricalPosition out;
  out.window = window;
  out.target = target;
  const auto& mu = choose(source, rng, out.component);
  std::vector<ConjugateSample> pairs;
  pairs.reserve(static_cast<std::size_t>(2 * window + 1));
  for (long long k = -window; k <= window; ++k) pairs.push_back(sample_conjugate_pair(mu, rng));
  const auto at = [&](long long k) -> const ConjugateSample& { return pairs[static_cast<std::size_t>(k + window)]; };
  const auto& card = at(target);
  std::uint64_t below = 0, above = 0;
  for (long long k = -window; k < target; ++k)
    if (precedes_ordered(mu, at(k), card)) ++below;
  for (long long k = target + 1; k <= window; ++k)
    if (!precedes_ordered(mu, card, at(k))) ++above;
  out.x_hat = static_cast<double>(below) / static_cast<double>(window);
  out.y_hat = static_cast<double>(above) / static_cast<double>(window);
  out.card = card;
  out.x_true = card.x(mu);
  out.y_true = card.y(mu);
  return out;
}

std::vector<std::uint64_t> ranking_counts(const OrderingSource& source, const LabelSet& labels, std::uint64_t samples,
                                          Rng& rng) {
  OrderingSampler sampler(source, labels);
  std::vector<std::uint64_t> counts(factorial(labels.size()), 0);
  for (std::uint64_t s = 0; s < samples; ++s) ++counts[sampler.draw_lex(rng)];
  return counts;
}

stats::TestReport exchangeability_test(const OrderingSource& source, const LabelSet& first, const LabelSet& second,
                                       std::uint64_t samples, Rng& rng, double alpha) {
  if (first.size() != second.size()) throw Error(ErrorKind::DimensionMismatch, "label sets differ in size");
  Rng stream_a = rng.split(1);
  Rng stream_b = rng.split(2);
  const auto a = ranking_counts(source, first, samples, stream_a);
  const auto b = ranking_counts(source, second, samples, stream_b);
  return stats::chi_square_two_sample(a, b, alpha);
}

}  // namespace riffle
