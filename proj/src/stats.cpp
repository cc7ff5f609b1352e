#include "riffle/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "riffle/error.hpp"

namespace riffle::stats {

double chi_square_survival(double statistic, double dof) {
  if (dof <= 0) return 1.0;
  if (statistic <= 0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, statistic / 2.0);
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0) return 1.0;
  if (lambda < 1.18) {
    // P(K <= l) = sqrt(2 pi)/l * sum exp(-(2k-1)^2 pi^2 / (8 l^2)); converges
    // fast for small l where the alternating series does not.
    const double a = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double odd = 2.0 * k - 1.0;
      sum += std::exp(-odd * odd * a);
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

TestReport finish(double statistic, double p, std::uint64_t n, double alpha, std::size_t dof) {
  TestReport r;
  r.statistic = statistic;
  r.p_value = std::clamp(p, 0.0, 1.0);
  r.samples = n;
  r.alpha = alpha;
  r.degrees_of_freedom = dof;
  r.passed = r.p_value >= alpha;
  return r;
}

}  // namespace

TestReport chi_square_goodness(std::span<const std::uint64_t> counts, std::span<const Rational> expected,
                               double alpha) {
  if (counts.size() != expected.size()) throw Error(ErrorKind::DimensionMismatch, "counts and expected differ in length");
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) throw Error(ErrorKind::EmptyCounts, "chi-square with no observations");
  Rational mass(0);
  for (const auto& p : expected) mass += p;
  if (mass != 1) throw Error(ErrorKind::DimensionMismatch, "expected probabilities sum to " + to_string(mass));

  struct Cell {
    double expected;
    double observed;
  };
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = expected[i].get_d() * static_cast<double>(total);
    if (e == 0.0 && counts[i] == 0) continue;
    cells.push_back({e, static_cast<double>(counts[i])});
  }
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.expected < b.expected; });
  // Pool from the small end until the smallest pooled cell reaches 5.
  while (cells.size() > 1 && cells.front().expected < 5.0) {
    cells[1].expected += cells[0].expected;
    cells[1].observed += cells[0].observed;
    cells.erase(cells.begin());
    std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.expected < b.expected; });
  }
  double statistic = 0.0;
  for (const auto& c : cells) {
    if (c.expected == 0.0) {
      // Observations where none are possible.
      return finish(std::numeric_limits<double>::infinity(), 0.0, total, alpha, cells.size() - 1);
    }
    const double d = c.observed - c.expected;
    statistic += d * d / c.expected;
  }
  const std::size_t dof = cells.size() - 1;
  return finish(statistic, chi_square_survival(statistic, static_cast<double>(dof)), total, alpha, dof);
}

TestReport chi_square_two_sample(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b, double alpha) {
  if (a.size() != b.size()) throw Error(ErrorKind::DimensionMismatch, "two-sample counts differ in length");
  double na = 0, nb = 0;
  for (auto c : a) na += static_cast<double>(c);
  for (auto c : b) nb += static_cast<double>(c);
  if (na == 0 || nb == 0) throw Error(ErrorKind::EmptyCounts, "two-sample chi-square with an empty sample");
  const double n = na + nb;
  double statistic = 0.0;
  std::size_t columns = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double col = static_cast<double>(a[i]) + static_cast<double>(b[i]);
    if (col == 0) continue;
    ++columns;
    const double ea = col * na / n;
    const double eb = col * nb / n;
    statistic += (static_cast<double>(a[i]) - ea) * (static_cast<double>(a[i]) - ea) / ea;
    statistic += (static_cast<double>(b[i]) - eb) * (static_cast<double>(b[i]) - eb) / eb;
  }
  const std::size_t dof = columns > 0 ? columns - 1 : 0;
  return finish(statistic, chi_square_survival(statistic, static_cast<double>(dof)),
                static_cast<std::uint64_t>(n), alpha, dof);
}

TestReport ks_test(std::span<const double> samples, const std::function<double(double)>& cdf,
                   const std::function<double(double)>& cdf_left, double alpha) {
  if (samples.empty()) throw Error(ErrorKind::EmptyCounts, "KS test with no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    // Empirical CDF jumps from i/n to j/n at sorted[i].
    const double below = static_cast<double>(i) / n;
    const double at = static_cast<double>(j) / n;
    d = std::max({d, std::fabs(at - cdf(sorted[i])), std::fabs(below - cdf_left(sorted[i]))});
    i = j;
  }
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  return finish(d, kolmogorov_survival(lambda), sorted.size(), alpha, 0);
}

TestReport ks_uniform(std::span<const double> samples, double alpha) {
  for (double x : samples)
    if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorKind::OutOfRange, "KS sample outside [0,1]");
  auto identity = [](double x) { return x; };
  return ks_test(samples, identity, identity, alpha);
}

double empirical_tv(std::span<const std::uint64_t> counts, const PermutationDistribution& reference) {
  if (counts.size() != reference.support_size())
    throw Error(ErrorKind::DimensionMismatch, "counts do not cover S_n for the reference n");
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  if (total == 0.0) throw Error(ErrorKind::EmptyCounts, "empirical TV with no samples");
  double tv = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i)
    tv += std::fabs(static_cast<double>(counts[i]) / total - reference.at(i).get_d());
  return 0.5 * tv;
}

double hoeffding_radius(std::uint64_t n, double delta) {
  return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n)));
}

double binomial_standard_error(double p, std::uint64_t n) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace riffle::stats
