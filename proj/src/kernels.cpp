#include "riffle/kernels.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

#include "riffle/error.hpp"

namespace riffle {

// ---------------------------------------------------------------------------
// ShuffleMap

bool is_measure_preserving(const std::vector<AffinePiece>& pieces) {
  struct Image {
    Rational lo, hi, weight;
  };
  std::vector<Image> images;
  std::vector<Rational> cuts{Rational(0), Rational(1)};
  for (const auto& p : pieces) {
    if (p.slope == 0) return false;
    Rational a = p(p.lo), b = p(p.hi);
    if (a > b) std::swap(a, b);
    images.push_back({a, b, Rational(1) / abs(p.slope)});
    cuts.push_back(a);
    cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    const Rational mid = (cuts[i - 1] + cuts[i]) / 2;
    if (mid < 0 || mid > 1) continue;
    Rational density(0);
    for (const auto& im : images)
      if (im.lo < mid && mid < im.hi) density += im.weight;
    if (density != 1) return false;
  }
  return true;
}

ShuffleMap::ShuffleMap(std::vector<AffinePiece> pieces) : pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw Error(ErrorKind::InvalidCoupling, "shuffle map has no pieces");
  std::sort(pieces_.begin(), pieces_.end(), [](const AffinePiece& a, const AffinePiece& b) { return a.lo < b.lo; });
  Rational cursor(0);
  for (const auto& p : pieces_) {
    if (p.lo != cursor) throw Error(ErrorKind::InvalidCoupling, "shuffle map pieces do not tile [0,1]");
    if (p.lo >= p.hi) throw Error(ErrorKind::InvalidCoupling, "empty shuffle map piece");
    if (p.slope == 0) throw Error(ErrorKind::InvalidCoupling, "flat shuffle map piece");
    const Rational a = p(p.lo), b = p(p.hi);
    if (a < 0 || a > 1 || b < 0 || b > 1) throw Error(ErrorKind::InvalidCoupling, "shuffle map leaves [0,1]");
    cursor = p.hi;
  }
  if (cursor != 1) throw Error(ErrorKind::InvalidCoupling, "shuffle map pieces do not reach 1");
  if (!is_measure_preserving(pieces_)) throw Error(ErrorKind::InvalidCoupling, "shuffle map does not preserve Lebesgue measure");
  for (const auto& p : pieces_) {
    lo_approx_.push_back(p.lo.get_d());
    slope_approx_.push_back(p.slope.get_d());
    intercept_approx_.push_back(p.intercept.get_d());
  }
}

std::size_t ShuffleMap::piece_index(const Rational& x) const {
  if (x < 0 || x > 1) throw Error(ErrorKind::OutOfRange, "shuffle map argument outside [0,1]");
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                             [](const Rational& v, const AffinePiece& p) { return v < p.lo; });
  return static_cast<std::size_t>(it - pieces_.begin()) - 1;
}

std::size_t ShuffleMap::piece_index(double x) const {
  auto it = std::upper_bound(lo_approx_.begin(), lo_approx_.end(), x);
  auto idx = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - lo_approx_.begin() - 1, 0));
  // Approximations truncate, so only equality with a breakpoint is in doubt.
  if (idx > 0 && x == lo_approx_[idx] && compare_exact(x, pieces_[idx].lo) < 0) --idx;
  return idx;
}

Rational ShuffleMap::operator()(const Rational& x) const { return pieces_[piece_index(x)](x); }

double ShuffleMap::operator()(double x) const {
  const auto i = piece_index(x);
  return std::clamp(slope_approx_[i] * x + intercept_approx_[i], 0.0, 1.0);
}

ShuffleMap shuffle_map_from_measure(const QuasiUniformMeasure& mu) {
  if (!mu.purely_atomic())
    throw Error(ErrorKind::NotPurelyAtomic, "measure has diffuse mass " + to_string(mu.diffuse_mass()));
  std::vector<AffinePiece> pieces;
  for (const auto& g : mu.gaps()) {
    const Rational width = g.hi - g.lo;
    if (g.atom_side == AtomSide::Right)
      pieces.push_back({g.lo, g.hi, Rational(1) / width, -g.lo / width});
    else
      pieces.push_back({g.lo, g.hi, Rational(-1) / width, g.hi / width});
  }
  return ShuffleMap(std::move(pieces));
}

// ---------------------------------------------------------------------------
// GridCopula

GridCopula::GridCopula(std::size_t m, std::vector<double> probs) : m_(m), probs_(std::move(probs)) {
  double acc = 0.0;
  for (double p : probs_) cumulative_.push_back(acc += p);
}

GridCopula GridCopula::from_rationals(std::vector<std::vector<Rational>> cells) {
  const std::size_t m = cells.size();
  if (m == 0) throw Error(ErrorKind::InvalidCoupling, "empty grid");
  const Rational target(1, m);
  std::vector<Rational> cols(m, Rational(0));
  std::vector<double> probs;
  for (const auto& row : cells) {
    if (row.size() != m) throw Error(ErrorKind::InvalidCoupling, "grid is not square");
    Rational sum(0);
    for (std::size_t j = 0; j < m; ++j) {
      if (row[j] < 0) throw Error(ErrorKind::InvalidCoupling, "negative grid cell");
      sum += row[j];
      cols[j] += row[j];
      probs.push_back(row[j].get_d());
    }
    if (sum != target) throw Error(ErrorKind::InvalidCoupling, "grid row sums to " + to_string(sum) + ", not " + to_string(target));
  }
  for (const auto& c : cols)
    if (c != target) throw Error(ErrorKind::InvalidCoupling, "grid column sums to " + to_string(c) + ", not " + to_string(target));
  return GridCopula(m, std::move(probs));
}

GridCopula GridCopula::from_doubles(const std::vector<std::vector<double>>& cells, double tolerance) {
  const std::size_t m = cells.size();
  if (m == 0) throw Error(ErrorKind::InvalidCoupling, "empty grid");
  const double target = 1.0 / static_cast<double>(m);
  std::vector<double> cols(m, 0.0), probs;
  for (const auto& row : cells) {
    if (row.size() != m) throw Error(ErrorKind::InvalidCoupling, "grid is not square");
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (!(row[j] >= 0.0)) throw Error(ErrorKind::InvalidCoupling, "negative grid cell");
      sum += row[j];
      cols[j] += row[j];
      probs.push_back(row[j]);
    }
    if (std::fabs(sum - target) > tolerance) throw Error(ErrorKind::InvalidCoupling, "grid row sum is off by more than the tolerance");
  }
  for (double c : cols)
    if (std::fabs(c - target) > tolerance) throw Error(ErrorKind::InvalidCoupling, "grid column sum is off by more than the tolerance");
  return GridCopula(m, std::move(probs));
}

std::size_t GridCopula::pick(double u) const {
  const double scaled = u * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), scaled);
  auto idx = static_cast<std::size_t>(it - cumulative_.begin());
  if (idx >= probs_.size()) idx = probs_.size() - 1;
  while (probs_[idx] == 0.0 && idx > 0) --idx;
  return idx;
}

// ---------------------------------------------------------------------------
// CouplingSampler

struct CouplingSampler::Impl {
  Kind kind = Kind::NuMu;
  std::optional<QuasiUniformMeasure> measure;
  // v = y + U (x - y) inside gap i.
  std::vector<Rational> gap_slope;
  std::vector<Rational> gap_intercept;
  std::optional<ShuffleMap> map;
  std::optional<GridCopula> grid;
  std::vector<std::pair<Rational, CouplingSampler>> components;
  std::vector<Rational> cumulative;
  std::vector<double> cumulative_approx;
};

namespace {

std::shared_ptr<CouplingSampler::Impl> measure_impl(CouplingSampler::Kind kind, QuasiUniformMeasure mu) {
  auto impl = std::make_shared<CouplingSampler::Impl>();
  impl->kind = kind;
  for (const auto& g : mu.gaps()) {
    impl->gap_slope.push_back(g.atom() - g.conjugate_end());
    impl->gap_intercept.push_back(g.conjugate_end());
  }
  impl->measure = std::move(mu);
  return impl;
}

}  // namespace

struct CouplingAccess {
  static const CouplingSampler::Impl& impl(const CouplingSampler& s) { return *s.impl_; }
  static CouplingSampler make(std::shared_ptr<const CouplingSampler::Impl> impl) { return CouplingSampler(std::move(impl)); }
};

CouplingSampler CouplingSampler::nu_mu(QuasiUniformMeasure mu) {
  return CouplingSampler(measure_impl(Kind::NuMu, std::move(mu)));
}

CouplingSampler CouplingSampler::nu_mu_star(QuasiUniformMeasure mu) {
  return CouplingSampler(measure_impl(Kind::NuMuStar, std::move(mu)));
}

CouplingSampler CouplingSampler::deterministic(ShuffleMap map) {
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::Deterministic;
  impl->map = std::move(map);
  return CouplingSampler(std::move(impl));
}

CouplingSampler CouplingSampler::grid(GridCopula grid) {
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::Grid;
  impl->grid = std::move(grid);
  return CouplingSampler(std::move(impl));
}

CouplingSampler CouplingSampler::mixture(std::vector<std::pair<Rational, CouplingSampler>> components) {
  if (components.empty()) throw Error(ErrorKind::InvalidCoupling, "mixture has no components");
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::Mixture;
  Rational total(0);
  for (const auto& [w, s] : components) {
    if (w <= 0) throw Error(ErrorKind::InvalidCoupling, "mixture weights must be positive");
    total += w;
    impl->cumulative.push_back(total);
    impl->cumulative_approx.push_back(total.get_d());
  }
  if (total != 1) throw Error(ErrorKind::InvalidCoupling, "mixture weights sum to " + to_string(total));
  impl->components = std::move(components);
  return CouplingSampler(std::move(impl));
}

CouplingSampler CouplingSampler::identity() { return nu_mu(builtin::identity()); }

CouplingSampler::Kind CouplingSampler::kind() const { return impl_->kind; }

const QuasiUniformMeasure& CouplingSampler::measure() const {
  if (!impl_->measure) throw Error(ErrorKind::InvalidCoupling, "sampler is not built from a measure");
  return *impl_->measure;
}

const ShuffleMap& CouplingSampler::map() const {
  if (!impl_->map) throw Error(ErrorKind::InvalidCoupling, "sampler is not deterministic");
  return *impl_->map;
}

const GridCopula& CouplingSampler::grid_copula() const {
  if (!impl_->grid) throw Error(ErrorKind::InvalidCoupling, "sampler is not a grid copula");
  return *impl_->grid;
}

const std::vector<std::pair<Rational, CouplingSampler>>& CouplingSampler::components() const {
  return impl_->components;
}

Rational Coordinate::exact() const {
  if (slope == nullptr) return riffle::exact(t);
  return *slope * riffle::exact(t) + *intercept;
}

namespace {

Coordinate plain(double value) {
  Coordinate c;
  c.approx = value;
  c.t = value;
  return c;
}

void draw_into(const CouplingSampler::Impl& impl, Rng& rng, CouplingDraw& out) {
  switch (impl.kind) {
    case CouplingSampler::Kind::NuMu:
    case CouplingSampler::Kind::NuMuStar: {
      const auto& mu = *impl.measure;
      const auto pair = sample_conjugate_pair(mu, rng);
      const double u = rng.uniform01();
      Coordinate first = plain(u);
      Coordinate second;
      if (pair.is_diffuse()) {
        second = plain(pair.u());
      } else {
        const auto i = pair.gap_index();
        const double x = mu.atom_approx(i), y = mu.conjugate_end_approx(i);
        second.approx = std::clamp(u * x + (1.0 - u) * y, 0.0, 1.0);
        second.t = u;
        second.slope = &impl.gap_slope[i];
        second.intercept = &impl.gap_intercept[i];
        second.increasing = mu.gap(i).atom_side == AtomSide::Right;
        second.gap = &mu.gap(i);
      }
      if (impl.kind == CouplingSampler::Kind::NuMu) {
        out.u_coord = first;
        out.v_coord = second;
      } else {
        out.u_coord = second;
        out.v_coord = first;
      }
      out.pair = pair;
      break;
    }
    case CouplingSampler::Kind::Deterministic: {
      const auto& map = *impl.map;
      out.pair.reset();
      const double u = rng.uniform01();
      const auto i = map.piece_index(u);
      const auto& piece = map.pieces()[i];
      out.u_coord = plain(u);
      Coordinate v;
      v.approx = map(u);
      v.t = u;
      v.slope = &piece.slope;
      v.intercept = &piece.intercept;
      v.increasing = piece.slope > 0;
      out.v_coord = v;
      break;
    }
    case CouplingSampler::Kind::Grid: {
      const auto& grid = *impl.grid;
      out.pair.reset();
      const auto cell = grid.pick(rng.uniform01());
      const double m = static_cast<double>(grid.size());
      const double row = static_cast<double>(cell / grid.size());
      const double col = static_cast<double>(cell % grid.size());
      out.u_coord = plain((row + rng.uniform01()) / m);
      out.v_coord = plain((col + rng.uniform01()) / m);
      break;
    }
    case CouplingSampler::Kind::Mixture: {
      const double w = rng.uniform01();
      std::size_t k = impl.components.size() - 1;
      for (std::size_t i = 0; i + 1 < impl.components.size(); ++i) {
        if (w < impl.cumulative_approx[i] ||
            (w == impl.cumulative_approx[i] && compare_exact(w, impl.cumulative[i]) < 0)) {
          k = i;
          break;
        }
      }
      out.components.push_back(k);
      draw_into(CouplingAccess::impl(impl.components[k].second), rng, out);
      return;
    }
  }
  out.u = out.u_coord.approx;
  out.v = out.v_coord.approx;
}

int sign_of(double a, double b) { return (a > b) - (a < b); }

/// Exact three-way comparison of coordinate values (0 means equal reals).
int compare_values(const Coordinate& a, const Coordinate& b) {
  if (a.slope != nullptr && a.slope == b.slope && a.intercept == b.intercept) {
    const int c = sign_of(a.t, b.t);
    return a.increasing ? c : -c;
  }
  if (a.slope == nullptr && b.slope == nullptr) return sign_of(a.t, b.t);
  if (std::fabs(a.approx - b.approx) > 1e-12) return sign_of(a.approx, b.approx);
  const int c = cmp(a.exact(), b.exact());
  return (c > 0) - (c < 0);
}

/// For two cards whose final positions are exactly equal: true if card a
/// ends below card b.
bool tie_below(const Coordinate& a, int a_initial, const Coordinate& b, int b_initial) {
  if (a.slope != nullptr && a.slope == b.slope && a.intercept == b.intercept) {
    // Same gap (or map piece) and equal U: keep the initial order on an
    // increasing piece, reverse it on a decreasing one.
    return a.increasing ? a_initial < b_initial : a_initial > b_initial;
  }
  if (a.gap != nullptr && b.gap != nullptr) {
    // Adjacent components: the one further right goes above.
    const Rational ma = a.gap->lo + a.gap->hi, mb = b.gap->lo + b.gap->hi;
    if (ma != mb) return ma < mb;
  } else if (a.gap != nullptr || b.gap != nullptr) {
    const Coordinate& tagged = a.gap != nullptr ? a : b;
    const Coordinate& other = a.gap != nullptr ? b : a;
    const bool gap_below = tagged.gap->hi <= other.exact();
    return a.gap != nullptr ? gap_below : !gap_below;
  }
  return a_initial < b_initial;
}

/// Ranks the drawn cards by u and by v, fills sigma (0-based u-position ->
/// 0-based v-position) and returns the number of exact v-ties settled.
std::size_t rank_cards(const std::vector<CouplingDraw>& draws, std::vector<std::size_t>& by_u,
                       std::vector<std::size_t>& by_v, std::vector<int>& u_rank, std::vector<int>& sigma) {
  const std::size_t n = draws.size();
  by_u.resize(n);
  by_v.resize(n);
  u_rank.resize(n);
  sigma.resize(n);
  std::iota(by_u.begin(), by_u.end(), std::size_t{0});
  std::sort(by_u.begin(), by_u.end(), [&](std::size_t a, std::size_t b) {
    const int c = compare_values(draws[a].u_coord, draws[b].u_coord);
    return c != 0 ? c < 0 : a < b;
  });
  for (std::size_t pos = 0; pos < n; ++pos) u_rank[by_u[pos]] = static_cast<int>(pos);
  std::iota(by_v.begin(), by_v.end(), std::size_t{0});
  std::sort(by_v.begin(), by_v.end(), [&](std::size_t a, std::size_t b) {
    const int c = compare_values(draws[a].v_coord, draws[b].v_coord);
    if (c != 0) return c < 0;
    return tie_below(draws[a].v_coord, u_rank[a], draws[b].v_coord, u_rank[b]);
  });
  std::size_t ties = 0;
  for (std::size_t pos = 0; pos < n; ++pos) {
    sigma[static_cast<std::size_t>(u_rank[by_v[pos]])] = static_cast<int>(pos);
    if (pos > 0 && compare_values(draws[by_v[pos - 1]].v_coord, draws[by_v[pos]].v_coord) == 0) ++ties;
  }
  return ties;
}

}  // namespace

CouplingDraw draw_coupling(const CouplingSampler& sampler, Rng& rng) {
  CouplingDraw out;
  draw_into(CouplingAccess::impl(sampler), rng, out);
  return out;
}

StepOutcome step_permutation(std::size_t n, const CouplingSampler& sampler, Rng& rng) {
  if (n == 0) throw Error(ErrorKind::InvalidSpec, "need at least one card");
  std::vector<CouplingDraw> draws(n);
  for (auto& d : draws) draw_into(CouplingAccess::impl(sampler), rng, d);
  std::vector<std::size_t> by_u, by_v;
  std::vector<int> u_rank, sigma;
  StepOutcome out;
  out.ties_resolved = rank_cards(draws, by_u, by_v, u_rank, sigma);
  std::vector<int> initial(n), final_order(n), one_line(n);
  for (std::size_t c = 0; c < n; ++c) {
    initial[c] = u_rank[c] + 1;
    one_line[c] = sigma[c] + 1;
  }
  for (std::size_t pos = 0; pos < n; ++pos) final_order[by_v[pos]] = static_cast<int>(pos + 1);
  for (std::size_t c = 0; c < n; ++c) {
    CardRecord rec;
    rec.label = static_cast<int>(c + 1);
    rec.u = draws[c].u;
    rec.v = draws[c].v;
    rec.pair = draws[c].pair;
    if (draws[c].v_coord.gap != nullptr && draws[c].pair && !draws[c].pair->is_diffuse())
      rec.tie_gap = draws[c].pair->gap_index();
    out.cards.push_back(rec);
  }
  out.initial = Permutation::from_images(std::move(initial));
  out.final_order = Permutation::from_images(std::move(final_order));
  out.sigma = Permutation::from_images(std::move(one_line));
  assert(out.sigma * out.initial == out.final_order);
  return out;
}

StepSampler::StepSampler(CouplingSampler sampler, std::size_t n) : sampler_(std::move(sampler)), n_(n), draws_(n) {
  if (n == 0) throw Error(ErrorKind::InvalidSpec, "need at least one card");
}

void StepSampler::draw_into(Rng& rng) {
  const auto& impl = CouplingAccess::impl(sampler_);
  for (auto& d : draws_) {
    d.components.clear();
    riffle::draw_into(impl, rng, d);
  }
  rank_cards(draws_, by_u_, by_v_, u_rank_, sigma_);
}

std::uint64_t StepSampler::draw_lex(Rng& rng) {
  draw_into(rng);
  return lex_index_of_ranks(sigma_);
}

Permutation StepSampler::draw(Rng& rng) {
  draw_into(rng);
  std::vector<int> one_line(n_);
  for (std::size_t i = 0; i < n_; ++i) one_line[i] = sigma_[i] + 1;
  return Permutation::from_images(std::move(one_line));
}

std::vector<Permutation> walk(std::size_t n, const CouplingSampler& sampler, std::size_t steps, Rng& rng,
                              std::optional<Permutation> start) {
  Permutation state = start ? *start : Permutation::identity(n);
  if (state.size() != n) throw Error(ErrorKind::DimensionMismatch, "start permutation has the wrong size");
  std::vector<Permutation> path{state};
  path.reserve(steps + 1);
  StepSampler stepper(sampler, n);
  for (std::size_t h = 0; h < steps; ++h) {
    state = stepper.draw(rng) * state;
    path.push_back(state);
  }
  return path;
}

std::vector<oracle::Segment> to_segments(const CouplingSampler& sampler) {
  const auto& impl = CouplingAccess::impl(sampler);
  std::vector<oracle::Segment> segs;
  switch (impl.kind) {
    case CouplingSampler::Kind::NuMu:
    case CouplingSampler::Kind::NuMuStar: {
      const auto& mu = *impl.measure;
      if (!mu.purely_atomic())
        throw Error(ErrorKind::ExactUnavailable, "exact kernels need a purely atomic measure");
      for (const auto& g : mu.gaps()) {
        oracle::Segment s{Rational(0), Rational(1), g.lo, g.hi, g.atom_side == AtomSide::Right, g.mass()};
        if (impl.kind == CouplingSampler::Kind::NuMuStar) {
          std::swap(s.u_lo, s.v_lo);
          std::swap(s.u_hi, s.v_hi);
        }
        segs.push_back(s);
      }
      break;
    }
    case CouplingSampler::Kind::Deterministic:
      for (const auto& p : impl.map->pieces()) {
        Rational a = p(p.lo), b = p(p.hi);
        if (a > b) std::swap(a, b);
        segs.push_back({p.lo, p.hi, a, b, p.slope > 0, p.hi - p.lo});
      }
      break;
    case CouplingSampler::Kind::Grid:
      throw Error(ErrorKind::ExactUnavailable, "grid copulas have no exact route");
    case CouplingSampler::Kind::Mixture:
      for (const auto& [w, component] : impl.components)
        for (auto s : to_segments(component)) {
          s.weight *= w;
          segs.push_back(s);
        }
      break;
  }
  return segs;
}

PermutationDistribution kernel_row_exact(std::size_t n, const CouplingSampler& sampler, oracle::Caps caps) {
  if (n == 0) throw Error(ErrorKind::InvalidSpec, "need at least one card");
  if (n > caps.max_n) throw Error(ErrorKind::CapExceeded, "n exceeds the exact cap");
  const auto segs = to_segments(sampler);
  return oracle::exact_segment_step_distribution(segs, n, caps);
}

std::vector<std::uint64_t> step_counts(std::size_t n, const CouplingSampler& sampler, std::uint64_t samples, Rng& rng) {
  StepSampler stepper(sampler, n);
  std::vector<std::uint64_t> counts(factorial(n), 0);
  for (std::uint64_t s = 0; s < samples; ++s) ++counts[stepper.draw_lex(rng)];
  return counts;
}

PermutationDistribution kernel_row_monte_carlo(std::size_t n, const CouplingSampler& sampler, std::uint64_t samples,
                                               Rng& rng) {
  return PermutationDistribution::from_counts(n, step_counts(n, sampler, samples, rng));
}

}  // namespace riffle
