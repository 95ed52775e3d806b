#pragma once

// Small statistics toolkit: Wilson intervals, chi-square tests and Pearson
// correlation with a Fisher-z interval.

#include <cstdint>
#include <vector>

namespace idla::stats {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double half_width() const noexcept { return 0.5 * (hi - lo); }
};

/// Wilson score interval for a binomial proportion (z = 1.96 gives 95%).
Interval wilson(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054);

struct Proportion {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  double value = 0.0;
  Interval ci;
};
Proportion proportion(std::uint64_t successes, std::uint64_t trials);

/// Upper tail P(X >= x) of a chi-square law with `df` degrees of freedom.
double chi_square_sf(double x, double df);

struct ChiSquareResult {
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

/// Homogeneity test of an r x c table of counts (rows = groups). Columns whose
/// pooled expected count falls below `min_expected` in any row are merged into
/// one column before testing.
ChiSquareResult homogeneity(const std::vector<std::vector<double>>& table, double min_expected = 5.0);

/// 2x2 test of equal proportions a/na vs b/nb.
ChiSquareResult two_proportions(std::uint64_t a, std::uint64_t na, std::uint64_t b, std::uint64_t nb);

struct Correlation {
  double r = 0.0;
  Interval ci;  // Fisher-z 95% interval, [-1,1] when undefined
  std::size_t n = 0;
};
Correlation pearson(const std::vector<double>& x, const std::vector<double>& y);

double mean(const std::vector<double>& v);

}  // namespace idla::stats
