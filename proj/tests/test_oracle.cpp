#include <gtest/gtest.h>

#include "riffle/error.hpp"
#include "riffle/kernels.hpp"
#include "riffle/oracle.hpp"
#include "support/generators.hpp"
#include "support/reference.hpp"

using namespace riffle;
using oracle::ShuffleType;

namespace {

Rational r(const char* s) { return parse_rational(s); }

std::vector<ref::Gap> reference_gaps(const QuasiUniformMeasure& mu) {
  std::vector<ref::Gap> gaps;
  for (const auto& g : mu.gaps())
    gaps.push_back({ref::Q(g.lo.get_num().get_si(), g.lo.get_den().get_si()),
                    ref::Q(g.hi.get_num().get_si(), g.hi.get_den().get_si()), g.atom_side == AtomSide::Right});
  return gaps;
}

}  // namespace

TEST(OrderingOracle, LebesgueIsUniform) {
  EXPECT_EQ(oracle::exact_ordering_distribution(builtin::lebesgue(), 3), PermutationDistribution::uniform(3));
}

TEST(OrderingOracle, GsrTwoCards) {
  const auto d = oracle::exact_ordering_distribution(builtin::gsr(), 2);
  EXPECT_EQ(d[Permutation::parse("12")], r("3/4"));
  EXPECT_EQ(d[Permutation::parse("21")], r("1/4"));
  EXPECT_EQ(ref::from_library(d), ref::digit_law(2, 2));
}

TEST(OrderingOracle, SingleLeftAtomReverses) {
  EXPECT_EQ(oracle::exact_ordering_distribution(builtin::reversal(), 3), PermutationDistribution::point_mass(Permutation::parse("321")));
}

TEST(OrderingOracle, AShufflesMatchTheDigitPicture) {
  for (int a = 2; a <= 4; ++a)
    for (std::size_t n = 1; n <= 5; ++n)
      EXPECT_EQ(ref::from_library(oracle::exact_ordering_distribution(builtin::a_shuffle(a), n)), ref::digit_law(a, n));
}

TEST(OrderingOracle, AtomicMeasuresMatchDirectEnumeration) {
  Rng rng(123);
  for (int trial = 0; trial < 25; ++trial) {
    const auto mu = gen::random_measure(rng, 2 + static_cast<int>(rng.below(5)), true);
    for (std::size_t n = 2; n <= 4; ++n)
      EXPECT_EQ(ref::from_library(oracle::exact_ordering_distribution(mu, n)), ref::atomic_ordering_law(reference_gaps(mu), n));
  }
  for (const auto& m : gen::atomic_builtins())
    EXPECT_EQ(ref::from_library(oracle::exact_ordering_distribution(m.measure, 4)), ref::atomic_ordering_law(reference_gaps(m.measure), 4))
        << m.name;
}

TEST(OrderingOracle, SumsToOneAndIsRestrictionConsistent) {
  Rng rng(7);
  std::vector<QuasiUniformMeasure> measures;
  for (const auto& m : gen::all_builtins()) measures.push_back(m.measure);
  for (int trial = 0; trial < 10; ++trial) measures.push_back(gen::random_measure(rng, 2 + static_cast<int>(rng.below(4))));
  for (const auto& mu : measures) {
    std::vector<PermutationDistribution> laws;
    try {
      for (std::size_t n = 1; n <= 5; ++n) laws.push_back(oracle::exact_ordering_distribution(mu, n));
    } catch (const Error& e) {
      ASSERT_EQ(e.kind(), ErrorKind::CapExceeded);
      continue;
    }
    for (std::size_t n = 1; n <= 5; ++n) {
      EXPECT_EQ(laws[n - 1].total(), 1);
      for (std::size_t m = 1; m < n; ++m) EXPECT_EQ(laws[n - 1].marginal_prefix(m), laws[m - 1]);
    }
  }
}

TEST(OrderingOracle, RelabellingInvariance) {
  for (const auto& m : gen::all_builtins()) {
    const auto base = oracle::exact_ordering_distribution(m.measure, 3);
    EXPECT_EQ(oracle::exact_ordering_distribution(m.measure, LabelSet({5, 40, 1000})), base) << m.name;
    EXPECT_EQ(oracle::exact_ordering_distribution(m.measure, LabelSet({-9, 0, 2})), base) << m.name;
  }
}

TEST(OrderingOracle, Caps) {
  try {
    oracle::exact_ordering_distribution(builtin::gsr(), 7);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CapExceeded);
  }
  EXPECT_THROW(oracle::exact_ordering_distribution(builtin::a_shuffle(9), 2), Error);
  EXPECT_NO_THROW(oracle::exact_ordering_distribution(builtin::a_shuffle(9), 2, oracle::Caps{6, 9}));
}

TEST(OrderingOracle, CellsFollowConditionOne) {
  const oracle::CellDecomposition cells(builtin::shared_atom());
  ASSERT_EQ(cells.cells().size(), 4u);
  EXPECT_EQ(cells.cells()[0].kind, oracle::Cell::Kind::Diffuse);
  EXPECT_EQ(cells.cells()[1].gap, 0u);
  EXPECT_EQ(cells.cells()[2].gap, 1u);
  Rational total(0);
  for (const auto& c : cells.cells()) total += c.mass;
  EXPECT_EQ(total, 1);
}

TEST(StepOracle, Examples) {
  const auto two = oracle::exact_step_distribution(builtin::gsr(), 2, ShuffleType::Two);
  EXPECT_EQ(two.at(0), r("3/4"));
  EXPECT_EQ(two.at(1), r("1/4"));
  const auto a3 = oracle::exact_step_distribution(builtin::a_shuffle(3), 2, ShuffleType::One);
  EXPECT_EQ(a3.at(0), r("2/3"));
  EXPECT_EQ(a3.at(1), r("1/3"));
  EXPECT_EQ(oracle::exact_step_distribution(builtin::lebesgue(), 4, ShuffleType::One),
            oracle::exact_step_distribution(builtin::lebesgue(), 4, ShuffleType::Two));
}

TEST(StepOracle, TypeTwoIsTheInverseLaw) {
  for (const auto& m : gen::all_builtins())
    for (std::size_t n = 2; n <= 4; ++n)
      EXPECT_EQ(oracle::exact_step_distribution(m.measure, n, ShuffleType::Two),
                oracle::exact_step_distribution(m.measure, n, ShuffleType::One).inverted());
}

TEST(TvDistance, Examples) {
  const auto u2 = PermutationDistribution::uniform(2);
  EXPECT_EQ(oracle::tv_distance(u2, u2), 0);
  EXPECT_EQ(oracle::tv_distance(PermutationDistribution::point_mass(Permutation::identity(2)), u2), r("1/2"));
  EXPECT_EQ(oracle::tv_distance(oracle::exact_step_distribution(builtin::gsr(), 2, ShuffleType::One), u2), r("1/4"));
  EXPECT_THROW(oracle::tv_distance(u2, PermutationDistribution::uniform(3)), Error);
}

TEST(MixingCurve, Examples) {
  for (std::size_t n = 2; n <= 4; ++n) {
    const auto curve = oracle::mixing_curve(builtin::identity(), n, ShuffleType::One, 6);
    for (const auto& tv : curve) EXPECT_EQ(tv, 1 - Rational(1) / factorial(n));
  }
  const auto leb = oracle::mixing_curve(builtin::lebesgue(), 3, ShuffleType::One, 3);
  EXPECT_EQ(leb, (std::vector<Rational>{r("5/6"), 0, 0, 0}));
  const auto gsr = oracle::mixing_curve(builtin::gsr(), 4, ShuffleType::Two, 20);
  for (std::size_t h = 1; h < gsr.size(); ++h) EXPECT_LT(gsr[h], gsr[h - 1]);
  EXPECT_LT(gsr.back(), r("1/100"));
}

TEST(MixingCurve, AgreesWithConvolutionPowers) {
  const auto step = oracle::exact_step_distribution(builtin::tent(), 3, ShuffleType::One);
  auto state = PermutationDistribution::point_mass(Permutation::identity(3));
  const auto curve = oracle::mixing_curve(step, 5);
  for (std::size_t h = 0; h <= 5; ++h) {
    EXPECT_EQ(curve[h], oracle::tv_distance(state, PermutationDistribution::uniform(3)));
    state = step.convolve_left(state);
  }
}

TEST(MixingCurve, GsrTypeOneAndTwoMixAlike) {
  // TV to uniform is invariant under inverting every state.
  EXPECT_EQ(oracle::mixing_curve(builtin::gsr(), 4, ShuffleType::One, 8), oracle::mixing_curve(builtin::gsr(), 4, ShuffleType::Two, 8));
}

TEST(Stochasticity, AtomicAndDiffuseKernelsAreDoublyStochastic) {
  for (const auto& m : gen::all_builtins())
    for (std::size_t n = 2; n <= 4; ++n) {
      const auto rep = oracle::kernel_stochasticity(oracle::exact_step_distribution(m.measure, n, ShuffleType::One));
      EXPECT_TRUE(rep.doubly_stochastic) << m.name;
      for (const auto& s : rep.row_sums) EXPECT_EQ(s, 1);
      for (const auto& s : rep.column_sums) EXPECT_EQ(s, 1);
    }
}

TEST(SegmentRoute, RejectsNonUniformMarginals) {
  const std::vector<oracle::Segment> half{{r("0"), r("1/2"), r("0"), r("1"), true, r("1")}};
  try {
    oracle::exact_segment_step_distribution(half, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidCoupling);
  }
}

TEST(SegmentRoute, BakerMapMatchesItsRiffle) {
  // Swapping the two halves is a cut: cards below 1/2 move above the rest.
  const std::vector<oracle::Segment> cut{{r("0"), r("1/2"), r("1/2"), r("1"), true, r("1/2")},
                                         {r("1/2"), r("1"), r("0"), r("1/2"), true, r("1/2")}};
  const auto d = oracle::exact_segment_step_distribution(cut, 3);
  // k cards in the lower half (Binomial(3, 1/2)) become the top k.
  EXPECT_EQ(d[Permutation::parse("123")], r("2/8"));
  EXPECT_EQ(d[Permutation::parse("312")], r("3/8"));
  EXPECT_EQ(d[Permutation::parse("231")], r("3/8"));
}
