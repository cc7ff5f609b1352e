#include "riffle/measure.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "riffle/error.hpp"

namespace riffle {

namespace {

/// Exact "u < r" with a double fast path; only near-ties reach GMP.
bool less_exact(double u, const Rational& r, double r_approx) {
  const double tol = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(r_approx));
  if (u < r_approx - tol) return true;
  if (u > r_approx + tol) return false;
  return compare_exact(u, r) < 0;
}

bool greater_exact(double u, const Rational& r, double r_approx) {
  const double tol = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(r_approx));
  if (u > r_approx + tol) return true;
  if (u < r_approx - tol) return false;
  return compare_exact(u, r) > 0;
}

void require_unit(const Rational& x) {
  if (x < 0 || x > 1) throw Error(ErrorKind::OutOfRange, "point " + to_string(x) + " outside [0,1]");
}

Rational clamp_overlap(const Rational& lo, const Rational& hi, const Rational& x) {
  // Lebesgue length of (lo, hi) intersected with [0, x].
  if (x <= lo) return Rational(0);
  if (x >= hi) return hi - lo;
  return x - lo;
}

}  // namespace

AtomSide opposite(AtomSide side) { return side == AtomSide::Left ? AtomSide::Right : AtomSide::Left; }

QuasiUniformMeasure::QuasiUniformMeasure() : QuasiUniformMeasure(std::vector<GapInterval>{}) {}

QuasiUniformMeasure::QuasiUniformMeasure(std::vector<GapInterval> sorted_gaps) : gaps_(std::move(sorted_gaps)) {
  Rational cursor(0);
  for (const auto& g : gaps_) {
    if (g.lo > cursor) segments_.push_back({cursor, g.lo});
    cursor = g.hi;
  }
  if (cursor < 1) segments_.push_back({cursor, Rational(1)});

  diffuse_mass_ = 0;
  for (const auto& s : segments_) diffuse_mass_ += s.hi - s.lo;
  Rational atoms(0);
  for (const auto& g : gaps_) atoms += g.mass();
  if (diffuse_mass_ + atoms != 1) throw std::logic_error("quasi-uniform measure does not have total mass 1");

  std::vector<Rational> endpoints;
  for (const auto& g : gaps_) {
    lo_approx_.push_back(g.lo.get_d());
    hi_approx_.push_back(g.hi.get_d());
    endpoints.push_back(g.lo);
    endpoints.push_back(g.hi);
  }
  std::sort(endpoints.begin(), endpoints.end());
  endpoints.erase(std::unique(endpoints.begin(), endpoints.end()), endpoints.end());
  auto rank = [&](const Rational& r) {
    return static_cast<int>(std::lower_bound(endpoints.begin(), endpoints.end(), r) - endpoints.begin());
  };
  for (const auto& g : gaps_) {
    atom_rank_.push_back(rank(g.atom()));
    conj_rank_.push_back(rank(g.conjugate_end()));
  }
}

double QuasiUniformMeasure::atom_approx(std::size_t i) const {
  return gaps_[i].atom_side == AtomSide::Left ? lo_approx_[i] : hi_approx_[i];
}

double QuasiUniformMeasure::conjugate_end_approx(std::size_t i) const {
  return gaps_[i].atom_side == AtomSide::Left ? hi_approx_[i] : lo_approx_[i];
}

std::optional<std::size_t> QuasiUniformMeasure::gap_containing(double u) const {
  if (gaps_.empty()) return std::nullopt;
  // Last gap whose approximate left end is <= u, then its neighbours to
  // absorb rounding in the approximations.
  auto it = std::upper_bound(lo_approx_.begin(), lo_approx_.end(), u);
  const std::ptrdiff_t centre = (it - lo_approx_.begin()) - 1;
  for (std::ptrdiff_t k = centre - 1; k <= centre + 1; ++k) {
    if (k < 0 || k >= static_cast<std::ptrdiff_t>(gaps_.size())) continue;
    const auto i = static_cast<std::size_t>(k);
    if (greater_exact(u, gaps_[i].lo, lo_approx_[i]) && less_exact(u, gaps_[i].hi, hi_approx_[i])) return i;
  }
  return std::nullopt;
}

QuasiUniformMeasure validate(const MeasureSpec& spec) {
  std::vector<GapInterval> gaps = spec.gaps;
  for (const auto& g : gaps) {
    if (g.lo < 0 || g.lo > 1 || g.hi < 0 || g.hi > 1)
      throw Error(ErrorKind::OutOfRange, "gap (" + to_string(g.lo) + ", " + to_string(g.hi) + ") leaves [0,1]");
    if (g.lo >= g.hi) throw Error(ErrorKind::DegenerateGap, "gap (" + to_string(g.lo) + ", " + to_string(g.hi) + ") is empty");
  }
  std::sort(gaps.begin(), gaps.end(), [](const GapInterval& a, const GapInterval& b) {
    if (a.lo != b.lo) return a.lo < b.lo;
    return a.hi < b.hi;
  });
  for (std::size_t i = 1; i < gaps.size(); ++i) {
    if (gaps[i].lo < gaps[i - 1].hi)
      throw Error(ErrorKind::OverlappingGaps, "gaps (" + to_string(gaps[i - 1].lo) + ", " + to_string(gaps[i - 1].hi) +
                                                  ") and (" + to_string(gaps[i].lo) + ", " + to_string(gaps[i].hi) +
                                                  ") overlap");
  }
  return QuasiUniformMeasure(std::move(gaps));
}

Rational cdf(const QuasiUniformMeasure& mu, const Rational& x) {
  require_unit(x);
  Rational total(0);
  for (const auto& s : mu.diffuse_segments()) {
    if (x <= s.lo) break;
    total += (x < s.hi ? x : s.hi) - s.lo;
  }
  for (const auto& g : mu.gaps())
    if (g.atom() <= x) total += g.mass();
  return total;
}

Rational cdf_left(const QuasiUniformMeasure& mu, const Rational& x) {
  require_unit(x);
  Rational total(0);
  for (const auto& s : mu.diffuse_segments()) {
    if (x <= s.lo) break;
    total += (x < s.hi ? x : s.hi) - s.lo;
  }
  for (const auto& g : mu.gaps())
    if (g.atom() < x) total += g.mass();
  return total;
}

QuasiUniformMeasure conjugate(const QuasiUniformMeasure& mu) {
  MeasureSpec spec;
  for (const auto& g : mu.gaps()) spec.gaps.push_back({g.lo, g.hi, opposite(g.atom_side)});
  return validate(spec);
}

CandidateMeasure CandidateMeasure::from(const QuasiUniformMeasure& mu) {
  CandidateMeasure c;
  for (const auto& g : mu.gaps()) {
    c.removed.push_back({g.lo, g.hi});
    c.atoms.push_back({g.atom(), g.mass()});
  }
  return c;
}

namespace {

Rational candidate_diffuse_up_to(const CandidateMeasure& c, const Rational& x) {
  Rational removed(0);
  for (const auto& r : c.removed) removed += clamp_overlap(r.lo, r.hi, x);
  return x - removed;
}

bool well_formed(const CandidateMeasure& c) {
  auto removed = c.removed;
  for (const auto& r : removed)
    if (r.lo < 0 || r.hi > 1 || r.lo >= r.hi) return false;
  std::sort(removed.begin(), removed.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
  for (std::size_t i = 1; i < removed.size(); ++i)
    if (removed[i].lo < removed[i - 1].hi) return false;
  for (const auto& a : c.atoms)
    if (a.position < 0 || a.position > 1 || a.mass <= 0) return false;
  return true;
}

}  // namespace

Rational cdf(const CandidateMeasure& c, const Rational& x) {
  require_unit(x);
  Rational total = candidate_diffuse_up_to(c, x);
  for (const auto& a : c.atoms)
    if (a.position <= x) total += a.mass;
  return total;
}

Rational cdf_left(const CandidateMeasure& c, const Rational& x) {
  require_unit(x);
  Rational total = candidate_diffuse_up_to(c, x);
  for (const auto& a : c.atoms)
    if (a.position < x) total += a.mass;
  return total;
}

bool satisfies_sandwich(const CandidateMeasure& c) {
  if (!well_formed(c)) return false;
  for (const auto& a : c.atoms) {
    if (cdf_left(c, a.position) > a.position || a.position > cdf(c, a.position)) return false;
  }
  std::vector<Rational> cuts{Rational(0), Rational(1)};
  for (const auto& r : c.removed) {
    cuts.push_back(r.lo);
    cuts.push_back(r.hi);
  }
  for (const auto& a : c.atoms) cuts.push_back(a.position);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    const Rational mid = (cuts[i - 1] + cuts[i]) / 2;
    const bool removed = std::any_of(c.removed.begin(), c.removed.end(),
                                     [&](const auto& r) { return r.lo < mid && mid < r.hi; });
    if (!removed && cdf(c, mid) != mid) return false;
  }
  return true;
}

bool is_quasi_uniform(const CandidateMeasure& c) {
  if (!well_formed(c)) return false;
  Rational total = candidate_diffuse_up_to(c, Rational(1));
  for (const auto& a : c.atoms) total += a.mass;
  if (total != 1) return false;
  if (!satisfies_sandwich(c)) return false;
  if (c.atoms.size() != c.removed.size()) return false;

  // Each removed interval needs its own atom, of its own length, at one of
  // its own ends. Shared endpoints make greedy matching unsafe, so search.
  std::vector<bool> used(c.atoms.size(), false);
  std::function<bool(std::size_t)> match = [&](std::size_t k) -> bool {
    if (k == c.removed.size()) return true;
    const auto& r = c.removed[k];
    for (std::size_t j = 0; j < c.atoms.size(); ++j) {
      if (used[j]) continue;
      const auto& a = c.atoms[j];
      if (a.mass != r.hi - r.lo || (a.position != r.lo && a.position != r.hi)) continue;
      used[j] = true;
      if (match(k + 1)) return true;
      used[j] = false;
    }
    return false;
  };
  return match(0);
}

double ConjugateSample::x(const QuasiUniformMeasure& mu) const {
  return is_diffuse() ? u() : mu.atom_approx(gap_index());
}

double ConjugateSample::y(const QuasiUniformMeasure& mu) const {
  return is_diffuse() ? u() : mu.conjugate_end_approx(gap_index());
}

Rational ConjugateSample::x_exact(const QuasiUniformMeasure& mu) const {
  return is_diffuse() ? exact(u()) : mu.gap(gap_index()).atom();
}

Rational ConjugateSample::y_exact(const QuasiUniformMeasure& mu) const {
  return is_diffuse() ? exact(u()) : mu.gap(gap_index()).conjugate_end();
}

ConjugateSample sample_conjugate_pair(const QuasiUniformMeasure& mu, Rng& rng) {
  const double u = rng.uniform01();
  if (auto gap = mu.gap_containing(u)) return ConjugateSample::in_gap(*gap);
  return ConjugateSample::diffuse(u);
}

namespace builtin {

QuasiUniformMeasure lebesgue() { return QuasiUniformMeasure(); }

QuasiUniformMeasure gsr() {
  return validate({{{Rational(0), Rational(1, 2), AtomSide::Right}, {Rational(1, 2), Rational(1), AtomSide::Right}}});
}

QuasiUniformMeasure a_shuffle(int k) {
  if (k < 1) throw Error(ErrorKind::InvalidSpec, "a-shuffle needs K >= 1");
  MeasureSpec spec;
  for (int j = 1; j <= k; ++j) spec.gaps.push_back({Rational(j - 1) / k, Rational(j) / k, AtomSide::Right});
  for (auto& g : spec.gaps) {
    g.lo.canonicalize();
    g.hi.canonicalize();
  }
  return validate(spec);
}

QuasiUniformMeasure single_gap(const Rational& lo, const Rational& hi, AtomSide side) {
  return validate({{{lo, hi, side}}});
}

QuasiUniformMeasure identity() { return single_gap(Rational(0), Rational(1), AtomSide::Right); }

QuasiUniformMeasure reversal() { return single_gap(Rational(0), Rational(1), AtomSide::Left); }

QuasiUniformMeasure tent() {
  return validate({{{Rational(0), Rational(1, 2), AtomSide::Right}, {Rational(1, 2), Rational(1), AtomSide::Left}}});
}

QuasiUniformMeasure mixed() {
  return validate(
      {{{Rational(1, 4), Rational(1, 2), AtomSide::Right}, {Rational(3, 4), Rational(1), AtomSide::Left}}});
}

QuasiUniformMeasure shared_atom() {
  return validate(
      {{{Rational(1, 4), Rational(1, 2), AtomSide::Right}, {Rational(1, 2), Rational(3, 4), AtomSide::Left}}});
}

CandidateMeasure interior_atom_candidate() {
  CandidateMeasure c;
  c.removed.push_back({Rational(1, 2), Rational(3, 4)});
  c.atoms.push_back({Rational(5, 8), Rational(1, 4)});
  return c;
}

}  // namespace builtin

}  // namespace riffle
