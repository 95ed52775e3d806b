#include <doctest.h>

#include <cmath>
#include <random>

#include "idla/percolation.hpp"
#include "oracles.hpp"

using namespace idla;

namespace {

BooleanModel model_of(int dim, std::vector<Source> centers, std::vector<std::int64_t> radii) {
  BooleanModel m;
  m.dim = dim;
  m.centers = std::move(centers);
  m.radii = std::move(radii);
  m.first_time.assign(m.centers.size(), 0.0);
  return m;
}

std::vector<std::vector<std::size_t>> members(const std::vector<Cluster>& cs) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& c : cs) out.push_back(c.members);
  return out;
}

}  // namespace

TEST_CASE("trace radius") {
  ParticleTrace tr;
  const Site z{0, 4};
  tr.emission.source = Source{0, 4};
  tr.path = {z};
  CHECK(trace_radius(tr) == 0);
  tr.path = {z, Site{1, 4}, Site{1, 5}};
  CHECK(trace_radius(tr) == 1);
  tr.path = {z, Site{1, 4}, Site{2, 4}, Site{3, 4}, Site{2, 4}};
  CHECK(trace_radius(tr) == 0);
  tr.path.clear();
  tr.radius = 7;
  CHECK(trace_radius(tr) == 7);
}

TEST_CASE("radii tables") {
  SUBCASE("an empty reference gives radius zero everywhere") {
    const auto region = SourceBox::window(2, 5).enumerate();
    const auto t = radii_against(3, Aggregate(2), "empty", 100, Source{0, 0}, region, 3.0);
    CHECK_FALSE(t.records.empty());
    for (const auto& r : t.records) {
      CHECK(r.radius == 0);
      CHECK(r.steps == 0);
      CHECK(r.trusted);
      CHECK(r.reference == "empty");
    }
  }
  SUBCASE("silent sources have no records") {
    std::uint64_t seed = 0;
    const Source z{0, 0};
    while (!clock_tops(derive_key(seed, StreamTag::clock, z, 0), 0.1).empty()) ++seed;
    const auto t = radii_table(seed, 2, {z}, 0.1, 2.0, 8);
    CHECK(t.records.empty());
  }
  SUBCASE("records cover every top in [0, eps]") {
    const auto region = SourceBox::window(2, 4).enumerate();
    const auto t = radii_table(11, 2, region, 0.5, 2.0, 16);
    std::size_t expected = 0;
    for (const auto& z : region) expected += clock_tops(derive_key(11, StreamTag::clock, z, 0), 0.5).size();
    CHECK(t.records.size() == expected);
    CHECK(t.reference_size == static_cast<std::int64_t>(build_aggregate_forest(11, 2, 16, 2.0).aggregate.size()));
    for (const auto& r : t.records) {
      CHECK(r.start.time <= 0.5);
      CHECK(r.reference == "window:16");
    }
  }
  SUBCASE("eps above T is rejected") { CHECK_THROWS_AS(radii_table(1, 2, {Source{0, 0}}, 3.0, 2.0, 8), Error); }
}

TEST_CASE("localized radii agree with the global table when references agree") {
  int compared = 0;
  for (std::uint64_t s = 0; s < 30; ++s) {
    const std::uint64_t seed = replicate_seed(21, s);
    const Source x{0, 0};
    const std::int64_t M = 1;
    const auto local = localized_radii(x, M, seed, 0.5, 1.0);
    const auto global_ref = build_aggregate_forest(seed, 2, 40, 1.0).aggregate;
    const auto local_ref = build_aggregate_forest(seed, SourceBox{x, 20}, 1.0).aggregate;
    std::vector<Site> a, b;
    for (const auto& p : global_ref.order())
      if (in_strip(p.site, 10)) a.push_back(p.site);
    for (const auto& p : local_ref.order())
      if (in_strip(p.site, 10)) b.push_back(p.site);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) continue;
    const auto global = radii_table(seed, 2, SourceBox{x, 10}.enumerate(), 0.5, 1.0, 40);
    for (const auto& r : local) {
      if (oracle::hdist(r.start.source, x) + r.radius > 10 * M) continue;
      for (const auto& g : global.records) {
        if (g.start.source == r.start.source && g.start.particle_index == r.start.particle_index) {
          CHECK(g.radius == r.radius);
          ++compared;
        }
      }
    }
  }
  CHECK(compared > 0);
}

TEST_CASE("localized radii without emitting sources") {
  std::uint64_t seed = 0;
  auto silent = [](std::uint64_t s) {
    for (const auto& z : SourceBox{Source{0, 0}, 10}.enumerate())
      if (!clock_tops(derive_key(s, StreamTag::clock, z, 0), 0.001).empty()) return false;
    return true;
  };
  while (!silent(seed)) ++seed;
  CHECK(localized_radii(Source{0, 0}, 1, seed, 0.001, 1.0).empty());
}

TEST_CASE("boolean model and clusters") {
  SUBCASE("empty") {
    const auto m = build_boolean_model({}, 2, 0.1, 2.0);
    CHECK(m.centers.empty());
    CHECK(clusters(m).empty());
    CHECK_FALSE(origin_cluster_diameter(m).has_value());
  }
  SUBCASE("records are merged per source") {
    std::vector<RadiusRecord> recs(3);
    recs[0].start = {Source{0, 2}, 0.05, 1};
    recs[0].radius = 1;
    recs[1].start = {Source{0, 2}, 0.08, 2};
    recs[1].radius = 4;
    recs[2].start = {Source{0, -1}, 0.5, 1};
    recs[2].radius = 9;
    const auto m = build_boolean_model(recs, 2, 0.1, 2.0);
    REQUIRE(m.centers.size() == 1);
    CHECK(m.centers[0] == Source{0, 2});
    CHECK(m.radii[0] == 4);
    CHECK(m.first_time[0] == 0.05);
  }
  SUBCASE("separated and touching pairs") {
    CHECK(clusters(model_of(2, {Source{0, 0}, Source{0, 5}}, {2, 2})).size() == 2);
    const auto one = clusters(model_of(2, {Source{0, 0}, Source{0, 4}}, {2, 2}));
    REQUIRE(one.size() == 1);
    CHECK(one[0].members == std::vector<std::size_t>{0, 1});
  }
  SUBCASE("a path of five") {
    std::vector<Source> c;
    for (int i = 0; i < 5; ++i) c.push_back(Source{0, 3 * i});
    const auto cs = clusters(model_of(2, c, {1, 1, 1, 1, 1}));
    CHECK(cs.size() == 5);  // spacing 3 > 1 + 1
    const auto joined = clusters(model_of(2, c, {2, 1, 2, 1, 2}));
    REQUIRE(joined.size() == 1);
    CHECK(joined[0].members.size() == 5);
  }
  SUBCASE("random instances match the brute-force closure") {
    std::mt19937_64 rng(99);
    for (int t = 0; t < 50; ++t) {
      const int d = t % 2 == 0 ? 2 : 3;
      std::uniform_int_distribution<int> coord(-30, 30), rad(0, 4);
      std::vector<Source> c;
      std::vector<std::int64_t> r;
      for (int i = 0; i < 30; ++i) {
        c.push_back(d == 2 ? Source{0, coord(rng)} : Source{0, coord(rng), coord(rng)});
        r.push_back(rad(rng));
      }
      CHECK(members(clusters(model_of(d, c, r))) == oracle::closure_components(c, r));
    }
  }
}

TEST_CASE("origin cluster diameter") {
  CHECK_FALSE(origin_cluster_diameter(model_of(2, {Source{0, 1}}, {3})).has_value());
  CHECK(*origin_cluster_diameter(model_of(2, {Source{0, 0}}, {3})) == 3);
  CHECK(*origin_cluster_diameter(model_of(2, {Source{0, 0}, Source{0, 4}}, {2, 2})) == 6);
  CHECK(*origin_cluster_diameter(model_of(2, {Source{0, 0}, Source{0, 5}}, {2, 2})) == 2);
}

TEST_CASE("descending chains") {
  const std::vector<ChainRecord> fixture{{Source{0, 0}, 0.3, 3}, {Source{0, 5}, 0.2, 3}, {Source{0, 11}, 0.1, 3}};
  CHECK_FALSE(find_descending_chain({}, 0, 10).has_value());
  const auto chain = find_descending_chain(fixture, 0, 10);
  REQUIRE(chain.has_value());
  CHECK(*chain == std::vector<std::size_t>{0, 1, 2});
  CHECK(valid_descending_chain(fixture, *chain, 0, 10));

  auto broken = fixture;
  broken[1].time = 0.4;
  CHECK_FALSE(find_descending_chain(broken, 0, 10).has_value());
  CHECK_FALSE(valid_descending_chain(broken, {0, 1, 2}, 0, 10));
  CHECK_FALSE(valid_descending_chain(fixture, {0, 2}, 0, 10));
  CHECK_FALSE(valid_descending_chain(fixture, {1, 2}, 0, 10));
  CHECK_FALSE(valid_descending_chain(fixture, {0, 1}, 0, 10));
  CHECK_FALSE(valid_descending_chain(fixture, {}, 0, 10));
}

TEST_CASE("descending chains against exhaustive search") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 200; ++t) {
    std::uniform_int_distribution<int> count(1, 12), coord(-20, 20), rad(0, 4);
    std::uniform_real_distribution<double> time(0.0, 1.0);
    std::vector<ChainRecord> recs;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) recs.push_back({Source{0, coord(rng)}, time(rng), rad(rng)});
    const auto got = find_descending_chain(recs, 2, 12);
    CHECK(got.has_value() == oracle::chain_exists(recs, 2, 12));
    if (got) CHECK(valid_descending_chain(recs, *got, 2, 12));
  }
}

TEST_CASE("event G on explicit models") {
  const Source x{0, 0};
  const std::int64_t M = 3;
  CHECK_FALSE(event_G_model(model_of(2, {}, {}), x, M));
  CHECK(event_G_model(model_of(2, {x}, {9 * M}), x, M));
  CHECK_FALSE(event_G_model(model_of(2, {x}, {5 * M}), x, M));
  std::vector<Source> c;
  std::vector<std::int64_t> r;
  for (std::int64_t k = 0; 2 * M * k <= 9 * M; ++k) {
    c.push_back(Source{0, 2 * M * k});
    r.push_back(M + 1);
  }
  CHECK(event_G_model(model_of(2, c, r), x, M));
  // drop one link and the chain no longer escapes
  c.erase(c.begin() + 2);
  r.erase(r.begin() + 2);
  CHECK_FALSE(event_G_model(model_of(2, c, r), x, M));
}

TEST_CASE("pi estimates and the union bound") {
  const auto zero = estimate_pi(2, 0.0, 4, 2.0, 200, 1);
  CHECK(zero.p.successes == 0);
  CHECK(zero.p.value == 0.0);
  CHECK(union_bound(2, 0.0, 5) == 0.0);
  CHECK(check_union_bound(2, 0.0, 5, zero.p).pass);

  CHECK(union_bound(2, 0.01, 1) == doctest::Approx(0.2090).epsilon(1e-3));
  CHECK(union_bound(2, 0.01, 1) == doctest::Approx(-std::expm1(-0.01) * 21).epsilon(1e-12));
  CHECK(union_bound(3, 0.01, 1) == doctest::Approx(-std::expm1(-0.01) * 441).epsilon(1e-12));
  for (double e : {0.001, 0.01, 0.1}) {
    for (std::int64_t M : {1, 2, 4, 8}) {
      CHECK(union_bound(2, e, M) < union_bound(2, e * 2, M));
      CHECK(union_bound(2, e, M) < union_bound(2, e, M + 1));
    }
  }

  const auto p = estimate_pi(2, 0.001, 8, 2.0, 2000, 1);
  CHECK(p.p.trials == 2000);
  CHECK(p.p.value <= 0.05);
  CHECK(check_union_bound(2, 0.001, 8, p.p).pass);

  // thread count does not change the estimate
  const auto a = estimate_pi(2, 0.05, 2, 1.0, 100, 4, 1);
  const auto b = estimate_pi(2, 0.05, 2, 1.0, 100, 4, 3);
  CHECK(a.p.successes == b.p.successes);
}

TEST_CASE("multiscale check") {
  CHECK(multiscale_constant(2) == 4.0);
  CHECK(multiscale_constant(3) == static_cast<double>(hyperplane_sphere_size(3, 10) * hyperplane_sphere_size(3, 80)));

  auto prop = [](double v, double lo, double hi) {
    stats::Proportion p;
    p.value = v;
    p.ci = {lo, hi};
    p.trials = 1000;
    return p;
  };
  const auto fail = check_multiscale(prop(0.1, 0.09, 0.11), prop(0.3, 0.29, 0.31), 16.0, 0.01);
  CHECK(fail.verdict == Verdict::fail);
  CHECK(fail.rhs_hi == doctest::Approx(16 * 0.11 * 0.11 + 0.01));
  const auto degenerate = check_multiscale(prop(0, 0, 0), prop(0, 0, 0.005), 4.0, 0.01);
  CHECK(degenerate.verdict == Verdict::pass);
  CHECK(check_multiscale(prop(0, 0, 0), prop(0.02, 0.015, 0.025), 4.0, 0.01).verdict == Verdict::fail);
  CHECK(check_multiscale(prop(0.1, 0.0, 0.2), prop(0.1, 0.05, 0.15), 4.0, 0.0).verdict == Verdict::inconclusive);
  CHECK(std::string(verdict_name(Verdict::inconclusive)) == "inconclusive");
}
