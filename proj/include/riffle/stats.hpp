#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "riffle/distribution.hpp"
#include "riffle/rational.hpp"

namespace riffle::stats {

/// Outcome of a hypothesis test. `passed` means "not rejected at alpha".
struct TestReport {
  double statistic = 0.0;
  double p_value = 1.0;
  std::uint64_t samples = 0;
  double alpha = 0.01;
  std::size_t degrees_of_freedom = 0;
  bool passed = true;
};

inline constexpr double kAlphaSingle = 0.01;
inline constexpr double kAlphaSuite = 0.001;

/// Upper tail of chi-square with `dof` degrees of freedom.
double chi_square_survival(double statistic, double dof);

/// Q(lambda) = P(K > lambda) for the Kolmogorov limit law.
double kolmogorov_survival(double lambda);

/// Pearson goodness of fit. Cells whose expected count is below 5 are pooled
/// (smallest first) until every pooled cell reaches 5; df = cells - 1.
/// Throws Error(EmptyCounts) when there are no observations and
/// Error(DimensionMismatch) when the vectors differ in length or the expected
/// probabilities do not sum to 1.
TestReport chi_square_goodness(std::span<const std::uint64_t> counts, std::span<const Rational> expected,
                               double alpha = kAlphaSingle);

/// Chi-square test of homogeneity between two count vectors over the same
/// outcomes (2 x K contingency table; all-zero columns dropped).
TestReport chi_square_two_sample(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                                 double alpha = kAlphaSingle);

/// One-sample KS against U[0,1] with the asymptotic Kolmogorov p-value.
/// Throws Error(OutOfRange) for samples outside [0,1].
TestReport ks_uniform(std::span<const double> samples, double alpha = kAlphaSingle);

/// KS against a CDF that may jump: `cdf(x)` = F(x) and `cdf_left(x)` = F(x-).
/// The asymptotic p-value is conservative when F has atoms.
TestReport ks_test(std::span<const double> samples, const std::function<double(double)>& cdf,
                   const std::function<double(double)>& cdf_left, double alpha = kAlphaSingle);

/// TV between empirical frequencies (lex-indexed counts) and a reference law.
double empirical_tv(std::span<const std::uint64_t> counts, const PermutationDistribution& reference);

/// Hoeffding radius: with probability >= 1 - delta the mean of n [0,1]
/// variables lies within this distance of its expectation.
double hoeffding_radius(std::uint64_t n, double delta);

/// Standard error of a binomial proportion.
double binomial_standard_error(double p, std::uint64_t n);

}  // namespace riffle::stats
