#include "riffle/oracle.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <tuple>

#include "riffle/error.hpp"

namespace riffle::oracle {

namespace {

Rational rational_factorial(std::size_t k) { return Rational(mpz_class(static_cast<unsigned long>(factorial(k)))); }

void check_caps(std::size_t n, std::size_t cells, const Caps& caps) {
  if (n == 0) throw Error(ErrorKind::InvalidSpec, "need at least one card");
  if (n > caps.max_n)
    throw Error(ErrorKind::CapExceeded, "n = " + std::to_string(n) + " exceeds the exact cap " + std::to_string(caps.max_n));
  if (cells > caps.max_cells)
    throw Error(ErrorKind::CapExceeded,
                std::to_string(cells) + " cells exceed the exact cap " + std::to_string(caps.max_cells));
}

/// Walks every assignment of labelled cards to cells, then every arrangement
/// inside diffuse cells, crediting each resulting ranking.
class OrderingEnumerator {
 public:
  OrderingEnumerator(const std::vector<Cell>& cells, std::span<const long long> labels, PermutationDistribution& out)
      : cells_(cells), labels_(labels), out_(out), assign_(labels.size()), members_(cells.size()) {}

  void run() { assign_card(0, Rational(1)); }

 private:
  void assign_card(std::size_t card, const Rational& prob) {
    if (card == labels_.size()) {
      leaf(prob);
      return;
    }
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      if (cells_[c].mass == 0) continue;
      assign_[card] = c;
      assign_card(card + 1, prob * cells_[c].mass);
    }
  }

  void leaf(const Rational& prob) {
    for (auto& m : members_) m.clear();
    for (std::size_t card = 0; card < assign_.size(); ++card) members_[assign_[card]].push_back(card);
    weight_ = prob;
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      auto& m = members_[c];
      std::sort(m.begin(), m.end(), [&](std::size_t a, std::size_t b) { return labels_[a] < labels_[b]; });
      if (cells_[c].kind == Cell::Kind::Diffuse) {
        weight_ /= rational_factorial(m.size());
      } else if (cells_[c].side == AtomSide::Left) {
        std::reverse(m.begin(), m.end());
      }
    }
    sequence_.clear();
    arrange(0);
  }

  void arrange(std::size_t c) {
    if (c == cells_.size()) {
      std::vector<int> rank(sequence_.size());
      for (std::size_t pos = 0; pos < sequence_.size(); ++pos) rank[sequence_[pos]] = static_cast<int>(pos);
      out_.add(lex_index_of_ranks(rank), weight_);
      return;
    }
    auto& m = members_[c];
    const std::size_t mark = sequence_.size();
    if (cells_[c].kind == Cell::Kind::Atom || m.size() <= 1) {
      sequence_.insert(sequence_.end(), m.begin(), m.end());
      arrange(c + 1);
      sequence_.resize(mark);
      return;
    }
    std::vector<std::size_t> perm = m;
    std::sort(perm.begin(), perm.end());
    do {
      sequence_.insert(sequence_.end(), perm.begin(), perm.end());
      arrange(c + 1);
      sequence_.resize(mark);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }

  const std::vector<Cell>& cells_;
  std::span<const long long> labels_;
  PermutationDistribution& out_;
  std::vector<std::size_t> assign_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<std::size_t> sequence_;
  Rational weight_;
};

}  // namespace

CellDecomposition::CellDecomposition(const QuasiUniformMeasure& mu) {
  for (const auto& s : mu.diffuse_segments()) {
    Cell c;
    c.kind = Cell::Kind::Diffuse;
    c.mass = s.hi - s.lo;
    c.key_x = (s.lo + s.hi) / 2;
    c.key_y = c.key_x;
    cells_.push_back(c);
  }
  for (std::size_t i = 0; i < mu.gap_count(); ++i) {
    const auto& g = mu.gap(i);
    Cell c;
    c.kind = Cell::Kind::Atom;
    c.mass = g.mass();
    c.key_x = g.atom();
    c.key_y = g.conjugate_end();
    c.gap = i;
    c.side = g.atom_side;
    cells_.push_back(c);
  }
  std::stable_sort(cells_.begin(), cells_.end(), [](const Cell& a, const Cell& b) {
    if (a.key_x != b.key_x) return a.key_x < b.key_x;
    return a.key_y < b.key_y;
  });
}

PermutationDistribution exact_ordering_distribution(const QuasiUniformMeasure& mu, const LabelSet& labels, Caps caps) {
  const CellDecomposition cells(mu);
  check_caps(labels.size(), cells.cells().size(), caps);
  PermutationDistribution out(labels.size());
  OrderingEnumerator(cells.cells(), labels.labels(), out).run();
  return out;
}

PermutationDistribution exact_ordering_distribution(const QuasiUniformMeasure& mu, std::size_t n, Caps caps) {
  if (n == 0) throw Error(ErrorKind::InvalidSpec, "need at least one card");
  return exact_ordering_distribution(mu, LabelSet::first(n), caps);
}

PermutationDistribution exact_ordering_distribution(const MeasureMixture& mixture, std::size_t n, Caps caps) {
  PermutationDistribution out(n);
  for (const auto& c : mixture.components()) {
    const auto part = exact_ordering_distribution(c.measure, n, caps);
    for (std::uint64_t i = 0; i < part.support_size(); ++i)
      if (part.at(i) != 0) out.add(i, c.weight * part.at(i));
  }
  return out;
}

PermutationDistribution exact_step_distribution(const QuasiUniformMeasure& mu, std::size_t n, ShuffleType type,
                                                Caps caps) {
  auto law = exact_ordering_distribution(mu, n, caps);
  return type == ShuffleType::One ? law : law.inverted();
}

Rational tv_distance(const PermutationDistribution& p, const PermutationDistribution& q) {
  if (p.n() != q.n()) throw Error(ErrorKind::DimensionMismatch, "TV between different S_n");
  Rational sum(0);
  for (std::uint64_t i = 0; i < p.support_size(); ++i) sum += abs(p.at(i) - q.at(i));
  return sum / 2;
}

std::vector<Rational> mixing_curve(const PermutationDistribution& step, std::size_t steps) {
  const auto uniform = PermutationDistribution::uniform(step.n());
  auto state = PermutationDistribution::point_mass(Permutation::identity(step.n()));
  std::vector<Rational> curve;
  curve.reserve(steps + 1);
  curve.push_back(tv_distance(state, uniform));
  for (std::size_t h = 1; h <= steps; ++h) {
    state = step.convolve_left(state);
    curve.push_back(tv_distance(state, uniform));
  }
  return curve;
}

std::vector<Rational> mixing_curve(const QuasiUniformMeasure& mu, std::size_t n, ShuffleType type, std::size_t steps,
                                   Caps caps) {
  return mixing_curve(exact_step_distribution(mu, n, type, caps), steps);
}

StochasticityReport kernel_stochasticity(const PermutationDistribution& step) {
  const std::size_t n = step.n();
  const auto perms = all_permutations(n);
  StochasticityReport r;
  r.row_sums.assign(perms.size(), Rational(0));
  r.column_sums.assign(perms.size(), Rational(0));
  for (std::size_t s = 0; s < perms.size(); ++s) {
    const Rational& p = step.at(s);
    if (p == 0) continue;
    for (std::size_t a = 0; a < perms.size(); ++a) {
      r.row_sums[a] += p;
      r.column_sums[(perms[s] * perms[a]).lex_index()] += p;
    }
  }
  r.doubly_stochastic = std::all_of(r.row_sums.begin(), r.row_sums.end(), [](const Rational& x) { return x == 1; }) &&
                        std::all_of(r.column_sums.begin(), r.column_sums.end(), [](const Rational& x) { return x == 1; });
  return r;
}

namespace {

constexpr std::size_t kMaxSegments = 4096;
constexpr int kMaxRefineRounds = 64;

std::vector<Rational> endpoints(const std::vector<Segment>& segs, bool u_side) {
  std::vector<Rational> pts;
  for (const auto& s : segs) {
    pts.push_back(u_side ? s.u_lo : s.v_lo);
    pts.push_back(u_side ? s.u_hi : s.v_hi);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

/// Splits segments until u-intervals are pairwise equal or interior-disjoint,
/// and likewise v-intervals.
std::vector<Segment> refine(std::vector<Segment> segs) {
  for (int round = 0; round < kMaxRefineRounds; ++round) {
    const auto us = endpoints(segs, true);
    const auto vs = endpoints(segs, false);
    std::vector<Segment> next;
    bool changed = false;
    for (const auto& s : segs) {
      const Rational du = s.u_hi - s.u_lo, dv = s.v_hi - s.v_lo;
      std::vector<Rational> ts{Rational(0), Rational(1)};
      for (const auto& p : us)
        if (s.u_lo < p && p < s.u_hi) ts.push_back((p - s.u_lo) / du);
      for (const auto& q : vs)
        if (s.v_lo < q && q < s.v_hi) {
          const Rational frac = (q - s.v_lo) / dv;
          ts.push_back(s.increasing ? frac : Rational(1 - frac));
        }
      std::sort(ts.begin(), ts.end());
      ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
      if (ts.size() > 2) changed = true;
      for (std::size_t k = 1; k < ts.size(); ++k) {
        Segment piece;
        piece.increasing = s.increasing;
        piece.u_lo = s.u_lo + ts[k - 1] * du;
        piece.u_hi = s.u_lo + ts[k] * du;
        if (s.increasing) {
          piece.v_lo = s.v_lo + ts[k - 1] * dv;
          piece.v_hi = s.v_lo + ts[k] * dv;
        } else {
          piece.v_lo = s.v_lo + (1 - ts[k]) * dv;
          piece.v_hi = s.v_lo + (1 - ts[k - 1]) * dv;
        }
        piece.weight = s.weight * (ts[k] - ts[k - 1]);
        next.push_back(piece);
      }
    }
    if (next.size() > kMaxSegments) throw Error(ErrorKind::ExactUnavailable, "segment refinement does not settle");
    segs = std::move(next);
    if (!changed) {
      // Merge duplicates: identical placement and orientation.
      std::map<std::tuple<Rational, Rational, Rational, Rational, bool>, Rational> merged;
      for (const auto& s : segs) merged[{s.u_lo, s.u_hi, s.v_lo, s.v_hi, s.increasing}] += s.weight;
      std::vector<Segment> out;
      for (const auto& [key, w] : merged) {
        const auto& [ul, uh, vl, vh, inc] = key;
        out.push_back({ul, uh, vl, vh, inc, w});
      }
      return out;
    }
  }
  throw Error(ErrorKind::ExactUnavailable, "segment refinement does not settle");
}

struct Interval {
  Rational lo, hi;
  friend auto operator<=>(const Interval& a, const Interval& b) {
    if (a.lo != b.lo) return a.lo < b.lo ? std::strong_ordering::less : std::strong_ordering::greater;
    if (a.hi != b.hi) return a.hi < b.hi ? std::strong_ordering::less : std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }
  friend bool operator==(const Interval& a, const Interval& b) { return a.lo == b.lo && a.hi == b.hi; }
};

/// Distinct intervals on one side with the total weight they carry; checks
/// that they tile [0,1] with density one.
std::map<Interval, std::vector<std::size_t>> side_cells(const std::vector<Segment>& segs, bool u_side) {
  std::map<Interval, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto& s = segs[i];
    cells[u_side ? Interval{s.u_lo, s.u_hi} : Interval{s.v_lo, s.v_hi}].push_back(i);
  }
  Rational cursor(0);
  for (const auto& [iv, members] : cells) {
    if (iv.lo != cursor) throw Error(ErrorKind::InvalidCoupling, "segment marginal does not tile [0,1]");
    Rational w(0);
    for (auto i : members) w += segs[i].weight;
    if (w != iv.hi - iv.lo) throw Error(ErrorKind::InvalidCoupling, "segment marginal is not uniform");
    cursor = iv.hi;
  }
  if (cursor != 1) throw Error(ErrorKind::InvalidCoupling, "segment marginal does not tile [0,1]");
  return cells;
}

/// Every u-cell holds exactly one segment. Cards pick u-cells with
/// probability equal to length; within a v-cell the groups coming from
/// different u-cells interleave uniformly, and each group keeps (or reverses)
/// its u-order.
PermutationDistribution domain_singleton_law(const std::vector<Segment>& segs, std::size_t n) {
  std::vector<std::size_t> order(segs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return segs[a].u_lo < segs[b].u_lo; });
  std::vector<Interval> vcells;
  for (const auto& s : segs) vcells.push_back({s.v_lo, s.v_hi});
  std::sort(vcells.begin(), vcells.end());
  vcells.erase(std::unique(vcells.begin(), vcells.end()), vcells.end());

  const std::size_t D = order.size();
  std::vector<Rational> len(D);
  std::vector<bool> inc(D);
  std::vector<std::size_t> target(D);
  for (std::size_t d = 0; d < D; ++d) {
    const auto& s = segs[order[d]];
    len[d] = s.u_hi - s.u_lo;
    inc[d] = s.increasing;
    target[d] = static_cast<std::size_t>(std::lower_bound(vcells.begin(), vcells.end(), Interval{s.v_lo, s.v_hi}) -
                                         vcells.begin());
  }
  std::vector<std::vector<std::size_t>> feeders(vcells.size());
  for (std::size_t d = 0; d < D; ++d) feeders[target[d]].push_back(d);

  PermutationDistribution out(n);
  std::vector<std::size_t> k(D, 0);
  const Rational n_fact = rational_factorial(n);

  std::vector<std::size_t> off_u(D), off_v(vcells.size());
  std::vector<std::vector<std::size_t>> seq(vcells.size());
  std::vector<int> sigma(n);

  // Per composition: enumerate interleavings cell by cell.
  std::function<void(std::size_t, const Rational&)> interleave = [&](std::size_t r, const Rational& w) {
    if (r == vcells.size()) {
      out.add(lex_index_of_ranks(sigma), w);
      return;
    }
    auto s = seq[r];
    if (s.empty()) {
      interleave(r + 1, w);
      return;
    }
    Rational cell_w = w;
    for (auto d : feeders[r]) cell_w *= rational_factorial(k[d]);
    cell_w /= rational_factorial(s.size());
    do {
      std::vector<std::size_t> seen(D, 0);
      for (std::size_t j = 0; j < s.size(); ++j) {
        const auto d = s[j];
        const auto o = seen[d]++;
        const auto upos = off_u[d] + (inc[d] ? o : k[d] - 1 - o);
        sigma[upos] = static_cast<int>(off_v[r] + j);
      }
      interleave(r + 1, cell_w);
    } while (std::next_permutation(s.begin(), s.end()));
  };

  std::function<void(std::size_t, std::size_t, const Rational&)> compose = [&](std::size_t d, std::size_t left,
                                                                               const Rational& w) {
    if (d + 1 == D) {
      k[d] = left;
      Rational p = w;
      for (std::size_t j = 0; j < left; ++j) p *= len[d];
      p /= rational_factorial(left);
      if (p == 0) return;
      p *= n_fact;
      std::size_t acc = 0;
      for (std::size_t e = 0; e < D; ++e) {
        off_u[e] = acc;
        acc += k[e];
      }
      acc = 0;
      for (std::size_t r = 0; r < vcells.size(); ++r) {
        off_v[r] = acc;
        seq[r].clear();
        for (auto e : feeders[r])
          for (std::size_t c = 0; c < k[e]; ++c) seq[r].push_back(e);
        acc += seq[r].size();
      }
      interleave(0, p);
      return;
    }
    for (std::size_t take = 0; take <= left; ++take) {
      k[d] = take;
      Rational p = w;
      for (std::size_t j = 0; j < take; ++j) p *= len[d];
      p /= rational_factorial(take);
      compose(d + 1, left - take, p);
    }
  };
  compose(0, n, Rational(1));
  return out;
}

}  // namespace

PermutationDistribution exact_segment_step_distribution(std::span<const Segment> segments, std::size_t n, Caps caps) {
  if (segments.empty()) throw Error(ErrorKind::InvalidCoupling, "no segments");
  for (const auto& s : segments) {
    if (s.u_lo < 0 || s.u_hi > 1 || s.v_lo < 0 || s.v_hi > 1 || s.u_lo >= s.u_hi || s.v_lo >= s.v_hi || s.weight <= 0)
      throw Error(ErrorKind::InvalidCoupling, "malformed segment");
  }
  auto segs = refine(std::vector<Segment>(segments.begin(), segments.end()));
  const auto ucells = side_cells(segs, true);
  const auto vcells = side_cells(segs, false);
  const bool u_single = std::all_of(ucells.begin(), ucells.end(), [](const auto& kv) { return kv.second.size() == 1; });
  const bool v_single = std::all_of(vcells.begin(), vcells.end(), [](const auto& kv) { return kv.second.size() == 1; });
  if (u_single) {
    check_caps(n, ucells.size(), caps);
    return domain_singleton_law(segs, n);
  }
  if (v_single) {
    // Swap the roles of u and v; the step of the swapped coupling is the
    // inverse of ours.
    check_caps(n, vcells.size(), caps);
    for (auto& s : segs) {
      std::swap(s.u_lo, s.v_lo);
      std::swap(s.u_hi, s.v_hi);
    }
    return domain_singleton_law(segs, n).inverted();
  }
  throw Error(ErrorKind::ExactUnavailable, "coupling mixes several segments in both u-cells and v-cells");
}

}  // namespace riffle::oracle
