#include <gtest/gtest.h>

#include <cmath>

#include "riffle/error.hpp"
#include "riffle/kernels.hpp"
#include "riffle/oracle.hpp"
#include "riffle/stats.hpp"
#include "support/generators.hpp"
#include "support/reference.hpp"

using namespace riffle;

namespace {

Rational r(const char* s) { return parse_rational(s); }

ErrorKind error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error";
  return ErrorKind::InvalidSpec;
}

std::vector<std::pair<std::string, CouplingSampler>> sampler_zoo() {
  using namespace builtin;
  std::vector<std::pair<std::string, CouplingSampler>> out;
  for (const auto& m : gen::all_builtins()) {
    out.emplace_back(std::string("nu_mu:") + m.name, CouplingSampler::nu_mu(m.measure));
    out.emplace_back(std::string("nu_mu_star:") + m.name, CouplingSampler::nu_mu_star(m.measure));
  }
  out.emplace_back("deterministic:gsr", CouplingSampler::deterministic(shuffle_map_from_measure(gsr())));
  out.emplace_back("deterministic:tent", CouplingSampler::deterministic(shuffle_map_from_measure(tent())));
  out.emplace_back("grid", CouplingSampler::grid(GridCopula::from_rationals(
                               {{r("1/6"), r("1/6"), r("0")}, {r("0"), r("1/6"), r("1/6")}, {r("1/6"), r("0"), r("1/6")}})));
  out.emplace_back("mixture", CouplingSampler::mixture({{r("1/3"), CouplingSampler::nu_mu(gsr())},
                                                        {r("2/3"), CouplingSampler::deterministic(shuffle_map_from_measure(a_shuffle(3)))}}));
  return out;
}

}  // namespace

TEST(ShuffleMap, GsrIsDoublingModOne) {
  const auto s = shuffle_map_from_measure(builtin::gsr());
  ASSERT_EQ(s.pieces().size(), 2u);
  EXPECT_EQ(s.pieces()[0], (AffinePiece{r("0"), r("1/2"), r("2"), r("0")}));
  EXPECT_EQ(s.pieces()[1], (AffinePiece{r("1/2"), r("1"), r("2"), r("-1")}));
  EXPECT_EQ(s(0.3), 0.6);
  EXPECT_EQ(s(0.75), 0.5);
  for (int k = 0; k < 1000; ++k) {
    const Rational x = Rational(k) / 1000;
    Rational doubled = 2 * x;
    if (doubled >= 1) doubled -= 1;
    EXPECT_EQ(s(x), doubled);
  }
}

TEST(ShuffleMap, AShuffleAndReversal) {
  const auto s3 = shuffle_map_from_measure(builtin::a_shuffle(3));
  ASSERT_EQ(s3.pieces().size(), 3u);
  EXPECT_EQ(s3(r("1/2")), r("1/2"));
  EXPECT_EQ(s3(r("5/6")), r("1/2"));
  const auto rev = shuffle_map_from_measure(builtin::reversal());
  EXPECT_EQ(rev(r("1/4")), r("3/4"));
  EXPECT_EQ(rev.pieces()[0].slope, -1);
}

TEST(ShuffleMap, RejectsDiffuseMeasures) {
  EXPECT_EQ(error_of([] { shuffle_map_from_measure(builtin::lebesgue()); }), ErrorKind::NotPurelyAtomic);
  EXPECT_EQ(error_of([] { shuffle_map_from_measure(builtin::mixed()); }), ErrorKind::NotPurelyAtomic);
}

TEST(ShuffleMap, ValidatesPieces) {
  // Covers [0,1] but squashes: x -> x/2 is not measure preserving.
  EXPECT_EQ(error_of([] { ShuffleMap({{r("0"), r("1"), r("1/2"), r("0")}}); }), ErrorKind::InvalidCoupling);
  EXPECT_EQ(error_of([] { ShuffleMap({{r("0"), r("1/2"), r("2"), r("0")}}); }), ErrorKind::InvalidCoupling);
  EXPECT_EQ(error_of([] { ShuffleMap({{r("0"), r("1"), r("0"), r("1/2")}}); }), ErrorKind::InvalidCoupling);
  EXPECT_EQ(error_of([] { ShuffleMap({{r("0"), r("1"), r("1"), r("1/2")}}); }), ErrorKind::InvalidCoupling);
  // Baker-style swap of halves is fine.
  EXPECT_NO_THROW(ShuffleMap({{r("0"), r("1/2"), r("1"), r("1/2")}, {r("1/2"), r("1"), r("1"), r("-1/2")}}));
}

TEST(ShuffleMap, MeasurePreservationCheckIsExact) {
  EXPECT_TRUE(is_measure_preserving({{r("0"), r("1/3"), r("3"), r("0")}, {r("1/3"), r("1"), r("-3/2"), r("3/2")}}));
  EXPECT_FALSE(is_measure_preserving({{r("0"), r("1/3"), r("3"), r("0")}, {r("1/3"), r("1"), r("-1"), r("1")}}));
}

TEST(ShuffleMap, PushforwardIsUniform) {
  for (const auto& m : gen::atomic_builtins()) {
    const auto s = shuffle_map_from_measure(m.measure);
    Rng rng(4);
    std::vector<double> ys;
    for (int i = 0; i < 100000; ++i) ys.push_back(s(rng.uniform01()));
    EXPECT_TRUE(stats::ks_uniform(ys).passed) << m.name;
  }
}

TEST(GridCopula, ExactValidation) {
  EXPECT_NO_THROW(GridCopula::from_rationals({{r("1/2"), r("0")}, {r("0"), r("1/2")}}));
  EXPECT_EQ(error_of([] { GridCopula::from_rationals({{r("1/2"), r("0")}, {r("1/4"), r("1/4")}}); }), ErrorKind::InvalidCoupling);
  EXPECT_EQ(error_of([] { GridCopula::from_rationals({{r("1/2"), r("0")}}); }), ErrorKind::InvalidCoupling);
  EXPECT_EQ(error_of([] { GridCopula::from_rationals({{r("3/4"), r("-1/4")}, {r("-1/4"), r("3/4")}}); }), ErrorKind::InvalidCoupling);
}

TEST(GridCopula, FloatingRowSumsOffByOneInATrillionAreRejected) {
  const double off = 1e-12;
  EXPECT_NO_THROW(GridCopula::from_doubles({{0.25, 0.25}, {0.25, 0.25}}));
  EXPECT_EQ(error_of([&] { GridCopula::from_doubles({{0.25 + off, 0.25}, {0.25, 0.25 - off}}); }), ErrorKind::InvalidCoupling);
  EXPECT_EQ(error_of([&] { GridCopula::from_doubles({{0.25 + off, 0.25}, {0.25 - off, 0.25}}); }), ErrorKind::InvalidCoupling);
}

TEST(DrawCoupling, LebesgueIgnoresU) {
  const auto cs = CouplingSampler::nu_mu(builtin::lebesgue());
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto d = draw_coupling(cs, rng);
    ASSERT_TRUE(d.pair.has_value());
    EXPECT_EQ(d.v, d.pair->u());
  }
}

TEST(DrawCoupling, SingleRightAtomIsTheDiagonal) {
  const auto cs = CouplingSampler::nu_mu(builtin::identity());
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto d = draw_coupling(cs, rng);
    EXPECT_EQ(d.u, d.v);
  }
}

TEST(DrawCoupling, StarSwapsCoordinates) {
  Rng a(9), b(9);
  const auto d = draw_coupling(CouplingSampler::nu_mu(builtin::gsr()), a);
  const auto e = draw_coupling(CouplingSampler::nu_mu_star(builtin::gsr()), b);
  EXPECT_EQ(d.u, e.v);
  EXPECT_EQ(d.v, e.u);
}

TEST(DrawCoupling, DeterministicFollowsTheMap) {
  const auto s = shuffle_map_from_measure(builtin::gsr());
  const auto cs = CouplingSampler::deterministic(s);
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const auto d = draw_coupling(cs, rng);
    EXPECT_EQ(d.v, s(d.u));
    EXPECT_EQ(d.v_coord.exact(), s(exact(d.u)));
  }
}

TEST(DrawCoupling, MixtureRecordsComponent) {
  const auto cs = CouplingSampler::mixture({{r("1/2"), CouplingSampler::identity()}, {r("1/2"), CouplingSampler::nu_mu(builtin::reversal())}});
  Rng rng(3);
  int first = 0;
  for (int i = 0; i < 4000; ++i) {
    const auto d = draw_coupling(cs, rng);
    ASSERT_EQ(d.components.size(), 1u);
    if (d.components[0] == 0) {
      ++first;
      EXPECT_EQ(d.u, d.v);
    } else {
      EXPECT_NEAR(d.u + d.v, 1.0, 1e-15);
    }
  }
  EXPECT_NEAR(first / 4000.0, 0.5, 0.04);
  EXPECT_EQ(error_of([] { CouplingSampler::mixture({{r("1/2"), CouplingSampler::identity()}}); }), ErrorKind::InvalidCoupling);
}

TEST(DrawCoupling, EveryVariantHasUniformMarginals) {
  for (const auto& [name, cs] : sampler_zoo()) {
    Rng rng(77);
    std::vector<double> us, vs;
    for (int i = 0; i < 100000; ++i) {
      const auto d = draw_coupling(cs, rng);
      ASSERT_GE(d.u, 0.0);
      ASSERT_LE(d.v, 1.0);
      us.push_back(d.u);
      vs.push_back(d.v);
    }
    EXPECT_TRUE(stats::ks_uniform(us).passed) << name;
    EXPECT_TRUE(stats::ks_uniform(vs).passed) << name;
  }
}

TEST(StepPermutation, IdentityCouplingNeverMoves) {
  Rng rng(1);
  for (std::size_t n : {1u, 2u, 5u, 9u}) {
    for (int i = 0; i < 50; ++i) {
      const auto out = step_permutation(n, CouplingSampler::identity(), rng);
      EXPECT_TRUE(out.sigma.is_identity());
      EXPECT_EQ(out.final_order, out.initial);
    }
  }
}

TEST(StepPermutation, SigmaCarriesInitialToFinal) {
  Rng rng(2);
  for (const auto& [name, cs] : sampler_zoo()) {
    for (int i = 0; i < 50; ++i) {
      const auto out = step_permutation(6, cs, rng);
      EXPECT_EQ(out.sigma * out.initial, out.final_order) << name;
      ASSERT_EQ(out.cards.size(), 6u);
    }
  }
}

TEST(StepPermutation, ReversalAtomReversesEveryDeck) {
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto out = step_permutation(4, CouplingSampler::nu_mu(builtin::reversal()), rng);
    EXPECT_EQ(out.sigma.to_string(), "4321");
  }
}

TEST(StepPermutation, TiesAreCounted) {
  Rng rng(4);
  std::size_t ties = 0;
  for (int i = 0; i < 200; ++i) ties += step_permutation(4, CouplingSampler::nu_mu(builtin::gsr()), rng).ties_resolved;
  EXPECT_EQ(ties, 0u);
  ties = 0;
  for (int i = 0; i < 200; ++i) ties += step_permutation(4, CouplingSampler::nu_mu(builtin::lebesgue()), rng).ties_resolved;
  EXPECT_EQ(ties, 0u);
}

TEST(StepPermutation, GsrStarTwoCards) {
  Rng rng(5);
  const auto counts = step_counts(2, CouplingSampler::nu_mu_star(builtin::gsr()), 100000, rng);
  const std::vector<Rational> expected{r("3/4"), r("1/4")};
  EXPECT_TRUE(stats::chi_square_goodness(counts, expected, stats::kAlphaSuite).passed);
}

TEST(StepPermutation, GsrMapThreeCardsIsTheTextbookRiffle) {
  const auto cs = CouplingSampler::deterministic(shuffle_map_from_measure(builtin::gsr()));
  EXPECT_EQ(ref::from_library(kernel_row_exact(3, cs)), ref::riffle_law(2, 3));
  Rng rng(6);
  const auto counts = step_counts(3, cs, 100000, rng);
  const auto law = ref::riffle_law(2, 3);
  std::vector<Rational> expected(6, Rational(0));
  for (const auto& [s, p] : law) expected[Permutation::parse(s).lex_index()] = Rational(static_cast<long>(p.numerator())) / static_cast<long>(p.denominator());
  EXPECT_TRUE(stats::chi_square_goodness(counts, expected, stats::kAlphaSuite).passed);
}

TEST(Walk, IdentityStaysPut) {
  Rng rng(1);
  const auto start = Permutation::parse("3142");
  const auto path = walk(4, CouplingSampler::identity(), 10, rng, start);
  ASSERT_EQ(path.size(), 11u);
  for (const auto& p : path) EXPECT_EQ(p, start);
}

TEST(Walk, OneLebesgueStepIsUniform) {
  Rng rng(2);
  std::vector<std::uint64_t> counts(6, 0);
  for (int i = 0; i < 60000; ++i) ++counts[walk(3, CouplingSampler::nu_mu(builtin::lebesgue()), 1, rng)[1].lex_index()];
  const std::vector<Rational> expected(6, r("1/6"));
  EXPECT_TRUE(stats::chi_square_goodness(counts, expected, stats::kAlphaSuite).passed);
}

TEST(Walk, GsrTypeTwoMixesWithinTwentySteps) {
  Rng rng(3);
  const auto cs = CouplingSampler::nu_mu_star(builtin::gsr());
  std::vector<std::uint64_t> counts(24, 0);
  for (int i = 0; i < 20000; ++i) ++counts[walk(4, cs, 20, rng).back().lex_index()];
  EXPECT_LT(stats::empirical_tv(counts, PermutationDistribution::uniform(4)), 0.05);
}

TEST(Walk, ComposesOnTheLeft) {
  // Two deterministic reversals bring the deck back.
  Rng rng(4);
  const auto path = walk(5, CouplingSampler::nu_mu(builtin::reversal()), 2, rng, Permutation::parse("21435"));
  EXPECT_EQ(path[1], Permutation::parse("54321") * Permutation::parse("21435"));
  EXPECT_EQ(path[2], Permutation::parse("21435"));
}

TEST(KernelMatrix, Examples) {
  EXPECT_EQ(kernel_row_exact(4, CouplingSampler::identity()), PermutationDistribution::point_mass(Permutation::identity(4)));
  const auto gsr = kernel_row_exact(2, CouplingSampler::nu_mu(builtin::gsr()));
  EXPECT_EQ(gsr.at(0), r("3/4"));
  EXPECT_EQ(gsr.at(1), r("1/4"));
  const auto a3 = kernel_row_exact(2, CouplingSampler::nu_mu(builtin::a_shuffle(3)));
  EXPECT_EQ(a3.at(0), r("2/3"));
  EXPECT_EQ(a3.at(1), r("1/3"));
}

TEST(KernelMatrix, ExactModeNeedsAtoms) {
  EXPECT_EQ(error_of([] { kernel_row_exact(3, CouplingSampler::nu_mu(builtin::lebesgue())); }), ErrorKind::ExactUnavailable);
  EXPECT_EQ(error_of([] { kernel_row_exact(3, CouplingSampler::grid(GridCopula::from_rationals({{r("1")}}))); }),
            ErrorKind::ExactUnavailable);
  EXPECT_EQ(error_of([] { kernel_row_exact(7, CouplingSampler::nu_mu(builtin::gsr())); }), ErrorKind::CapExceeded);
}

TEST(KernelMatrix, MonteCarloMatchesExact) {
  Rng rng(8);
  const auto cs = CouplingSampler::nu_mu(builtin::a_shuffle(3));
  const auto mc = kernel_row_monte_carlo(3, cs, 200000, rng);
  EXPECT_LT(oracle::tv_distance(mc, kernel_row_exact(3, cs)), Rational(1, 100));
}

TEST(KernelMatrix, SegmentRouteMatchesTheReferenceForAtomicMeasures) {
  for (const auto& m : gen::atomic_builtins()) {
    std::vector<ref::Gap> gaps;
    for (const auto& g : m.measure.gaps())
      gaps.push_back({ref::Q(g.lo.get_num().get_si(), g.lo.get_den().get_si()),
                      ref::Q(g.hi.get_num().get_si(), g.hi.get_den().get_si()), g.atom_side == AtomSide::Right});
    for (std::size_t n = 2; n <= 4; ++n) {
      const auto one = ref::atomic_ordering_law(gaps, n);
      EXPECT_EQ(ref::from_library(kernel_row_exact(n, CouplingSampler::nu_mu(m.measure))), one) << m.name << " n=" << n;
      EXPECT_EQ(ref::from_library(kernel_row_exact(n, CouplingSampler::nu_mu_star(m.measure))), ref::invert(one))
          << m.name << " n=" << n;
    }
  }
}

TEST(KernelMatrix, AShuffleMapsAreTextbookRiffles) {
  for (int a : {2, 3, 4}) {
    const auto cs = CouplingSampler::deterministic(shuffle_map_from_measure(builtin::a_shuffle(a)));
    for (std::size_t n = 2; n <= 4; ++n) {
      EXPECT_EQ(ref::from_library(kernel_row_exact(n, cs)), ref::riffle_law(a, n)) << a << " " << n;
      EXPECT_EQ(ref::riffle_law(a, n), ref::invert(ref::digit_law(a, n)));
    }
  }
}

TEST(KernelMatrix, PerCardMixturesHaveNoExactRoute) {
  // Components are picked card by card, so the law is not the weighted sum
  // of the component laws and the segment route cannot separate them.
  const auto cs = CouplingSampler::mixture({{r("1/4"), CouplingSampler::identity()}, {r("3/4"), CouplingSampler::nu_mu(builtin::gsr())}});
  EXPECT_EQ(error_of([&] { kernel_row_exact(3, cs); }), ErrorKind::ExactUnavailable);
  Rng rng(9);
  const auto mc = kernel_row_monte_carlo(2, cs, 100000, rng);
  // Two cards: a swap has chance 1/4 when both use the GSR part and also 1/4
  // when exactly one does, so P(swap) = (9/16 + 6/16) / 4.
  EXPECT_NEAR(mc.at(1).get_d(), 15.0 / 64.0, 0.005);
}
