#include <doctest.h>

#include <cmath>

#include "idla/stats.hpp"

using namespace idla::stats;

TEST_CASE("wilson intervals") {
  const auto none = wilson(0, 0);
  CHECK(none.lo == 0.0);
  CHECK(none.hi == 1.0);
  const auto half = wilson(5, 10);
  CHECK(half.lo == doctest::Approx(0.236593).epsilon(1e-5));
  CHECK(half.hi == doctest::Approx(0.763407).epsilon(1e-5));
  CHECK(wilson(0, 100).lo == 0.0);
  CHECK(wilson(100, 100).hi == 1.0);
  CHECK(wilson(0, 200).hi == doctest::Approx(0.018845).epsilon(1e-4));
  const auto p = proportion(30, 120);
  CHECK(p.value == 0.25);
  CHECK(p.ci.lo < 0.25);
  CHECK(p.ci.hi > 0.25);
}

TEST_CASE("chi-square tail") {
  CHECK(chi_square_sf(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(chi_square_sf(0.0, 3) == 1.0);
  CHECK(chi_square_sf(11.344866730144373, 3) == doctest::Approx(0.01).epsilon(1e-9));
}

TEST_CASE("homogeneity") {
  const auto same = homogeneity({{10, 20, 30}, {10, 20, 30}});
  CHECK(same.statistic == doctest::Approx(0.0));
  CHECK(same.p_value == doctest::Approx(1.0));
  CHECK(same.df == 2);
  const auto diff = homogeneity({{90, 10}, {10, 90}});
  CHECK(diff.p_value < 1e-10);
  // sparse columns get pooled: here the two rare columns merge into one
  const auto pooled = homogeneity({{100, 1, 1}, {100, 1, 2}});
  CHECK(pooled.df == 1);
}

TEST_CASE("two proportions") {
  CHECK(two_proportions(50, 100, 50, 100).p_value == doctest::Approx(1.0));
  CHECK(two_proportions(10, 100, 60, 100).p_value < 1e-6);
  // hand computation: pooled 0.3, expected 30/70 per row
  const auto r = two_proportions(40, 100, 20, 100);
  CHECK(r.statistic == doctest::Approx(9.5238095).epsilon(1e-6));
}

TEST_CASE("pearson correlation") {
  const auto perfect = pearson({1, 2, 3, 4, 5}, {2, 4, 6, 8, 10});
  CHECK(perfect.r == doctest::Approx(1.0));
  const auto anti = pearson({1, 2, 3, 4, 5}, {5, 4, 3, 2, 1});
  CHECK(anti.r == doctest::Approx(-1.0));
  const auto flat = pearson({1, 1, 1}, {1, 2, 3});
  CHECK(flat.r == 0.0);
  CHECK(flat.ci.lo == -1.0);
  CHECK(flat.ci.hi == 1.0);
  const auto some = pearson({1, 2, 3, 4, 5, 6, 7, 8}, {2, 1, 4, 3, 6, 5, 8, 7});
  CHECK(some.r == doctest::Approx(0.9047619).epsilon(1e-6));
  CHECK(some.ci.lo < some.r);
  CHECK(some.ci.hi > some.r);
  CHECK(mean({1, 2, 3, 6}) == 3.0);
}
