#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "riffle/rational.hpp"
#include "riffle/rng.hpp"

namespace riffle {

enum class AtomSide { Left, Right };

AtomSide opposite(AtomSide side);

/// One open component (lo, hi) of the complement of F, together with the
/// point mass of size hi - lo sitting at one of its ends.
struct GapInterval {
  Rational lo;
  Rational hi;
  AtomSide atom_side = AtomSide::Right;

  Rational mass() const { return hi - lo; }
  /// Where the atom sits (the X value of a card drawn into this gap).
  const Rational& atom() const { return atom_side == AtomSide::Left ? lo : hi; }
  /// The opposite end (the Y value of a card drawn into this gap).
  const Rational& conjugate_end() const { return atom_side == AtomSide::Left ? hi : lo; }

  friend bool operator==(const GapInterval&, const GapInterval&) = default;
};

/// Unvalidated input: gaps in any order, nothing checked yet.
struct MeasureSpec {
  std::vector<GapInterval> gaps;
};

/// A maximal closed stretch [lo, hi] of F with positive length.
struct DiffuseSegment {
  Rational lo;
  Rational hi;
};

/// Lebesgue measure on a closed F plus finitely many endpoint atoms, one per
/// gap of F, each of mass equal to the gap length. Immutable once validated;
/// the only way to obtain one is validate() (or conjugate()).
class QuasiUniformMeasure {
 public:
  /// Lebesgue measure on [0,1] (no gaps).
  QuasiUniformMeasure();

  const std::vector<GapInterval>& gaps() const noexcept { return gaps_; }
  std::size_t gap_count() const noexcept { return gaps_.size(); }
  const GapInterval& gap(std::size_t i) const { return gaps_[i]; }

  const std::vector<DiffuseSegment>& diffuse_segments() const noexcept { return segments_; }

  /// Leb(F).
  const Rational& diffuse_mass() const noexcept { return diffuse_mass_; }
  bool purely_atomic() const { return diffuse_mass_ == 0; }

  /// Index of the gap whose open interior contains u, decided exactly.
  std::optional<std::size_t> gap_containing(double u) const;

  /// Double approximations used on hot paths; exact fallbacks live with the
  /// callers.
  double lo_approx(std::size_t i) const { return lo_approx_[i]; }
  double hi_approx(std::size_t i) const { return hi_approx_[i]; }
  double mid_approx(std::size_t i) const { return 0.5 * (lo_approx_[i] + hi_approx_[i]); }
  double atom_approx(std::size_t i) const;
  double conjugate_end_approx(std::size_t i) const;

  /// Rank of a gap endpoint among all distinct endpoint values; equal ranks
  /// mean exactly equal rationals.
  int atom_rank(std::size_t i) const { return atom_rank_[i]; }
  int conjugate_end_rank(std::size_t i) const { return conj_rank_[i]; }

  friend bool operator==(const QuasiUniformMeasure& a, const QuasiUniformMeasure& b) {
    return a.gaps_ == b.gaps_;
  }

 private:
  friend QuasiUniformMeasure validate(const MeasureSpec& spec);
  explicit QuasiUniformMeasure(std::vector<GapInterval> sorted_gaps);

  std::vector<GapInterval> gaps_;
  std::vector<DiffuseSegment> segments_;
  Rational diffuse_mass_;
  std::vector<double> lo_approx_;
  std::vector<double> hi_approx_;
  std::vector<int> atom_rank_;
  std::vector<int> conj_rank_;
};

/// Sorts and checks a raw spec. Throws Error with kind DegenerateGap,
/// OutOfRange or OverlappingGaps. Gaps sharing an endpoint are kept apart.
QuasiUniformMeasure validate(const MeasureSpec& spec);

/// mu[0, x]. Throws Error(OutOfRange) unless 0 <= x <= 1.
Rational cdf(const QuasiUniformMeasure& mu, const Rational& x);
/// mu[0, x).
Rational cdf_left(const QuasiUniformMeasure& mu, const Rational& x);

/// Same gaps, every atom moved to the other end of its gap.
QuasiUniformMeasure conjugate(const QuasiUniformMeasure& mu);

/// A measure of the form "density 1 off some removed open intervals, plus
/// free atoms", before anyone has checked that the atoms sit where a gap decomposition
/// decompositions say they must.
struct CandidateMeasure {
  struct Interval {
    Rational lo;
    Rational hi;
  };
  struct Atom {
    Rational position;
    Rational mass;
  };
  std::vector<Interval> removed;
  std::vector<Atom> atoms;

  static CandidateMeasure from(const QuasiUniformMeasure& mu);
};

Rational cdf(const CandidateMeasure& c, const Rational& x);
Rational cdf_left(const CandidateMeasure& c, const Rational& x);

/// Checks only the defining inequality: every atom has
/// cdf_left(p) <= p <= cdf(p), and cdf(x) = x on the diffuse part.
bool satisfies_sandwich(const CandidateMeasure& c);

/// True iff the candidate is a quasi-uniform decomposition as written: total
/// mass 1, the sandwich holds, and each removed interval carries exactly one
/// atom, of mass equal to its length, at one of its own endpoints.
bool is_quasi_uniform(const CandidateMeasure& c);

/// Outcome of one conjugate-pair draw: either a diffuse point u of F (then
/// X = Y = u) or a gap (then X is the atom end and Y the other end).
class ConjugateSample {
 public:
  static ConjugateSample diffuse(double u) { return ConjugateSample(Diffuse{u}); }
  static ConjugateSample in_gap(std::size_t index) { return ConjugateSample(InGap{index}); }

  bool is_diffuse() const noexcept { return std::holds_alternative<Diffuse>(v_); }
  double u() const { return std::get<Diffuse>(v_).u; }
  std::size_t gap_index() const { return std::get<InGap>(v_).index; }

  double x(const QuasiUniformMeasure& mu) const;
  double y(const QuasiUniformMeasure& mu) const;
  Rational x_exact(const QuasiUniformMeasure& mu) const;
  Rational y_exact(const QuasiUniformMeasure& mu) const;

  friend bool operator==(const ConjugateSample&, const ConjugateSample&) = default;

 private:
  struct Diffuse {
    double u;
    friend bool operator==(const Diffuse&, const Diffuse&) = default;
  };
  struct InGap {
    std::size_t index;
    friend bool operator==(const InGap&, const InGap&) = default;
  };
  explicit ConjugateSample(std::variant<Diffuse, InGap> v) : v_(v) {}
  std::variant<Diffuse, InGap> v_;
};

/// Draws u uniform on [0,1]; inside a gap interior it is that gap, otherwise
/// the diffuse point u (gap endpoints belong to F and come back as Diffuse).
ConjugateSample sample_conjugate_pair(const QuasiUniformMeasure& mu, Rng& rng);

namespace builtin {

QuasiUniformMeasure lebesgue();
/// Atoms 1/2 at 1/2 and at 1.
QuasiUniformMeasure gsr();
/// K equal right-atom gaps ((k-1)/K, k/K).
QuasiUniformMeasure a_shuffle(int k);
QuasiUniformMeasure single_gap(const Rational& lo, const Rational& hi, AtomSide side);
/// Single right atom at 1: the shuffle that never moves a card.
QuasiUniformMeasure identity();
/// Single left atom at 0: full reversal.
QuasiUniformMeasure reversal();
/// (0,1/2) right and (1/2,1) left; both atoms at 1/2.
QuasiUniformMeasure tent();
/// Diffuse on [0,1/4] and [1/2,3/4]; right atom at 1/2 from (1/4,1/2) and
/// left atom at 3/4 from (3/4,1).
QuasiUniformMeasure mixed();
/// Diffuse on [0,1/4] and [3/4,1]; gaps (1/4,1/2) right and (1/2,3/4) left,
/// both atoms at 1/2.
QuasiUniformMeasure shared_atom();

/// Density 1 on [0,1/2] and [3/4,1] with a mass 1/4 atom at 5/8.
CandidateMeasure interior_atom_candidate();

}  // namespace builtin

}  // namespace riffle
