#include "idla/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>

#include "idla/error.hpp"

namespace idla::stats {

Interval wilson(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  if (successes > trials) throw Error(ErrorCode::invalid_argument, "more successes than trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  double lo = std::max(0.0, center - half);
  double hi = std::min(1.0, center + half);
  if (successes == 0) lo = 0.0;
  if (successes == trials) hi = 1.0;
  return {lo, hi};
}

Proportion proportion(std::uint64_t successes, std::uint64_t trials) {
  Proportion p;
  p.successes = successes;
  p.trials = trials;
  p.value = trials ? static_cast<double>(successes) / static_cast<double>(trials) : 0.0;
  p.ci = wilson(successes, trials);
  return p;
}

double chi_square_sf(double x, double df) {
  if (df <= 0.0) return 1.0;
  if (x <= 0.0) return 1.0;
  boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, x));
}

ChiSquareResult homogeneity(const std::vector<std::vector<double>>& table, double min_expected) {
  ChiSquareResult res;
  const std::size_t rows = table.size();
  if (rows < 2) return res;
  const std::size_t cols = table.front().size();
  for (const auto& r : table) {
    if (r.size() != cols) throw Error(ErrorCode::invalid_argument, "ragged contingency table");
  }
  std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      row_sum[i] += table[i][j];
      col_sum[j] += table[i][j];
      total += table[i][j];
    }
  if (total <= 0.0) return res;
  const double min_row = *std::min_element(row_sum.begin(), row_sum.end());

  // Keep columns with enough expected mass, pool the rest into one.
  std::vector<std::size_t> keep;
  std::vector<std::size_t> pooled;
  for (std::size_t j = 0; j < cols; ++j) {
    if (col_sum[j] <= 0.0) continue;
    if (min_row * col_sum[j] / total >= min_expected) keep.push_back(j);
    else pooled.push_back(j);
  }
  std::vector<std::vector<double>> t(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (auto j : keep) t[i].push_back(table[i][j]);
    if (!pooled.empty()) {
      double s = 0.0;
      for (auto j : pooled) s += table[i][j];
      t[i].push_back(s);
    }
  }
  const std::size_t c = t.front().size();
  if (c < 2) return res;
  std::vector<double> cs(c, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < c; ++j) cs[j] += t[i][j];
  double stat = 0.0;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      const double e = row_sum[i] * cs[j] / total;
      if (e > 0.0) stat += (t[i][j] - e) * (t[i][j] - e) / e;
    }
  res.statistic = stat;
  res.df = static_cast<double>((rows - 1) * (c - 1));
  res.p_value = chi_square_sf(stat, res.df);
  return res;
}

ChiSquareResult two_proportions(std::uint64_t a, std::uint64_t na, std::uint64_t b, std::uint64_t nb) {
  const auto d = [](std::uint64_t v) { return static_cast<double>(v); };
  return homogeneity({{d(a), d(na - a)}, {d(b), d(nb - b)}}, 0.0);
}

Correlation pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(ErrorCode::invalid_argument, "correlation needs equal-length samples");
  Correlation c;
  c.n = x.size();
  c.ci = {-1.0, 1.0};
  if (c.n < 2) return c;
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < c.n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return c;
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  if (c.n > 3 && std::abs(c.r) < 1.0) {
    const double z = std::atanh(c.r);
    const double se = 1.0 / std::sqrt(static_cast<double>(c.n) - 3.0);
    c.ci = {std::tanh(z - 1.959963984540054 * se), std::tanh(z + 1.959963984540054 * se)};
  }
  return c;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace idla::stats
