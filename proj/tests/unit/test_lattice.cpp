#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <random>

#include "idla/lattice.hpp"
#include "oracles.hpp"

using namespace idla;

TEST_CASE("inf_norm examples") {
  CHECK(inf_norm(Site{0, 0}) == 0);
  CHECK(inf_norm(Site{3, -7}) == 7);
  CHECK(inf_norm(Site{-2, 5, 4}) == 5);
}

TEST_CASE("projection onto the hyperplane") {
  CHECK(project_to_hyperplane(Site{4, 1}) == Source{0, 1});
  CHECK(project_to_hyperplane(Site{0, 9, -3}) == Source{0, 9, -3});
  CHECK(project_to_hyperplane(Site{-5, 0, 0}) == Source{0, 0, 0});
  CHECK_THROWS_AS(Source(Site{1, 2}), Error);
}

TEST_CASE("strip membership") {
  CHECK(in_strip(Site{100, 2}, 2));
  CHECK_FALSE(in_strip(Site{0, 3}, 2));
  CHECK(in_strip(Site{7, -2, 2}, 2));

  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> c(-20, 20);
  for (int t = 0; t < 2000; ++t) {
    Site s{c(rng), c(rng), c(rng)};
    const std::int64_t K = c(rng) + 20;
    Site moved = s;
    moved[0] = c(rng);
    CHECK(in_strip(s, K) == in_strip(translate(s, Source::origin(3)), K));
    CHECK(in_strip(s, K) == in_strip(moved, K));
  }
}

TEST_CASE("hyperplane ball overlap examples") {
  CHECK(hball_overlap(Source{0, 0}, 1, Source{0, 2}, 1));
  CHECK_FALSE(hball_overlap(Source{0, 0}, 1, Source{0, 3}, 1));
  CHECK(hball_overlap(Source{0, 0, 0}, 2, Source{0, 3, 3}, 1));
  CHECK_THROWS_AS(hball_overlap(Source{0, 0}, -1, Source{0, 0}, 1), Error);
}

namespace {
bool cubes_meet_brute(const Source& a, std::int64_t ra, const Source& b, std::int64_t rb) {
  const int d = a.dim();
  // enumerate the points of the first cube
  std::vector<std::int64_t> p(static_cast<std::size_t>(d), 0);
  std::function<bool(int)> rec = [&](int axis) -> bool {
    if (axis == d) {
      for (int i = 1; i < d; ++i) {
        const std::int64_t diff = p[static_cast<std::size_t>(i)] - b[i];
        if (diff > rb || diff < -rb) return false;
      }
      return true;
    }
    for (std::int64_t v = a[axis] - ra; v <= a[axis] + ra; ++v) {
      p[static_cast<std::size_t>(axis)] = v;
      if (rec(axis + 1)) return true;
    }
    return false;
  };
  return rec(1);
}
}  // namespace

TEST_CASE("hball_overlap agrees with brute-force cube intersection") {
  for (int d : {2, 3}) {
    std::vector<Source> offsets;
    for (const auto& z : SourceBox::window(d, 8).enumerate()) offsets.push_back(z);
    const Source z1 = d == 2 ? Source{0, 1} : Source{0, 1, -2};
    for (const auto& off : offsets) {
      const Source z2 = Source(translate(z1.site(), off));
      for (std::int64_t r1 = 0; r1 <= 3; ++r1) {
        for (std::int64_t r2 = 0; r2 <= 3; ++r2) {
          const bool fast = hball_overlap(z1, r1, z2, r2);
          CHECK(fast == hball_overlap(z2, r2, z1, r1));
          CHECK(fast == cubes_meet_brute(z1, r1, z2, r2));
        }
      }
    }
  }
}

TEST_CASE("cone membership examples") {
  const ConeSpec c{Rational{1, 1}, Rational{9, 10}};
  CHECK(cone_contains(Site{0, 17}, c));
  CHECK(cone_contains(Site{0, 17}, ConeSpec{Rational{1, 1000}, Rational{1, 2}}));
  CHECK_FALSE(cone_contains(Site{3, 2}, c));
  CHECK(cone_contains(Site{1, 2}, c));
  CHECK(cone_contains(Site{-1, 2}, c));
  CHECK_FALSE(cone_contains(Site{1, 0}, c));
}

TEST_CASE("cone membership matches high-precision evaluation") {
  using boost::multiprecision::cpp_bin_float_50;
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> lvl(0, 400), eps_num(1, 40), a_num(1, 19);
  int decided = 0;
  for (int t = 0; t < 3000; ++t) {
    const Rational eps{eps_num(rng), 7};
    const Rational alpha{a_num(rng), 20};
    const ConeSpec cone{eps, alpha};
    const std::int64_t l = lvl(rng);
    const cpp_bin_float_50 bound = cpp_bin_float_50(eps.num) / eps.den *
                                   pow(cpp_bin_float_50(l), cpp_bin_float_50(alpha.num) / alpha.den);
    std::uniform_int_distribution<std::int64_t> first(0, static_cast<std::int64_t>(bound) + 3);
    const std::int64_t x = first(rng);
    const cpp_bin_float_50 gap = abs(cpp_bin_float_50(x) - bound);
    if (gap < cpp_bin_float_50("1e-30")) continue;
    ++decided;
    const bool expect = cpp_bin_float_50(x) <= bound;
    CHECK(cone_contains(Site{x, l}, cone) == expect);
    CHECK(cone_contains(Site{-x, 0, -l}, cone) == expect);
  }
  CHECK(decided > 2500);
}

TEST_CASE("cone membership is monotone in epsilon") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> c(-60, 60), e(1, 30);
  for (int t = 0; t < 2000; ++t) {
    const Site s{c(rng), c(rng)};
    const std::int64_t e1 = e(rng), e2 = e1 + e(rng);
    const Rational alpha{3, 5};
    if (cone_contains(s, ConeSpec{Rational{e1, 10}, alpha})) {
      CHECK(cone_contains(s, ConeSpec{Rational{e2, 10}, alpha}));
    }
  }
}

TEST_CASE("cone table agrees with cone_contains") {
  ConeTable table(ConeSpec{Rational{1, 1}, Rational{4, 5}});
  for (std::int64_t l = 0; l < 300; ++l) {
    for (std::int64_t x = 0; x < 40; ++x) {
      CHECK(table.contains(Site{x, l}) == cone_contains(Site{x, l}, table.spec()));
    }
  }
}

TEST_CASE("translations") {
  CHECK(translate(Site{1, 2}, Source{0, 3}) == Site{1, 5});
  CHECK(translate(Site{5, -9}, Source{0, 0}) == Site{5, -9});
  CHECK(translate(Site{2, -1, 4}, Source{0, 1, -4}) == Site{2, 0, 0});
  CHECK(negate(Source{0, 3, -1}) == Site{0, -3, 1});
  CHECK_THROWS_AS(translate(Site{0, 2147483647}, Source{0, 1}), Error);
}

TEST_CASE("coordinates outside 32 bits are rejected") {
  try {
    Site s{0, std::int64_t{1} << 40};
    FAIL("expected an overflow error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::overflow);
  }
}

TEST_CASE("dimension range") {
  CHECK_NOTHROW(check_dimension(2));
  CHECK_NOTHROW(check_dimension(4));
  try {
    check_dimension(5);
    FAIL("expected UnsupportedDimension");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unsupported_dimension);
  }
}

TEST_CASE("rational parsing") {
  CHECK(Rational::parse("3/5") == Rational{3, 5});
  CHECK(Rational::parse("0.8") == Rational{4, 5});
  CHECK(Rational::parse("08") == Rational{8, 1});
  CHECK(Rational::parse("1e-3") == Rational{1, 1000});
  CHECK(Rational::parse("2") == Rational{2, 1});
  CHECK(Rational::parse("0.25/0.5") == Rational{1, 2});
  CHECK_THROWS_AS(Rational::parse("abc"), Error);
  CHECK_THROWS_AS(Rational::parse("1/0"), Error);
}

TEST_CASE("hyperplane spheres and boxes") {
  CHECK(hyperplane_sphere_size(2, 0) == 1);
  CHECK(hyperplane_sphere_size(2, 10) == 2);
  for (int d : {2, 3, 4}) {
    for (std::int64_t r = 0; r <= 5; ++r) {
      std::int64_t count = 0;
      for (const auto& z : SourceBox::window(d, 5).enumerate()) count += oracle::level_of(z.site()) == r;
      CHECK(hyperplane_sphere_size(d, r) == count);
    }
  }
  const SourceBox box{Source{0, 2, -1}, 2};
  CHECK(box.size() == 25);
  CHECK(box.enumerate().size() == 25);
  const auto by_level = box.enumerate_by_level();
  CHECK(by_level.front() == box.center);
  for (std::size_t i = 1; i < by_level.size(); ++i) {
    CHECK(oracle::hdist(by_level[i - 1], box.center) <= oracle::hdist(by_level[i], box.center));
  }
}
