#include <doctest.h>

#include <cmath>
#include <set>

#include "idla/engine.hpp"
#include "oracles.hpp"

using namespace idla;

namespace {
const Emission kE1{Source{0, 0}, 0.5, 1};

void check_forest(const Aggregate& agg) {
  const Forest f = forest_of(agg);
  std::set<Site> vertices(f.vertices.begin(), f.vertices.end());
  CHECK(vertices.size() == agg.size());
  for (const auto& p : agg.order()) CHECK(agg.contains(p.site));
  CHECK(f.parent.size() + f.roots.size() == agg.size());
  // parents are inserted before children, so the graph is acyclic; each
  // parent is a lattice neighbour and each tree root lies on H
  for (std::size_t i = 0; i < agg.size(); ++i) {
    const auto& p = agg.at(i);
    if (p.parent < 0) {
      CHECK(p.site[0] == 0);
      continue;
    }
    REQUIRE(static_cast<std::size_t>(p.parent) < i);
    const Site& q = agg.at(static_cast<std::size_t>(p.parent)).site;
    int l1 = 0;
    for (int k = 0; k < p.site.dim(); ++k) l1 += std::abs(p.site[k] - q[k]);
    CHECK(l1 == 1);
  }
}
}  // namespace

TEST_CASE("particle on an empty aggregate settles at its source") {
  Aggregate agg(2);
  const std::vector<int> script;
  WalkCursor c(&script, 2, 0);
  const auto tr = advance_particle(c, Source{0, 3}, agg);
  CHECK(tr.settle_site == Site{0, 3});
  CHECK_FALSE(tr.entry_edge.has_value());
  CHECK(tr.steps_taken == 0);
  CHECK(tr.parent == -1);
  CHECK(tr.path == std::vector<Site>{Site{0, 3}});
}

TEST_CASE("scripted exits") {
  const Source z{0, 0};
  const Site e1z{1, 0}, e2z{2, 0};
  SUBCASE("one forced step") {
    Aggregate agg(2);
    agg.insert(z.site(), kE1, -1);
    const std::vector<int> script{0};
    WalkCursor c(&script, 2, 0);
    const auto tr = advance_particle(c, z, agg);
    CHECK(tr.settle_site == e1z);
    REQUIRE(tr.entry_edge.has_value());
    CHECK(*tr.entry_edge == Edge{z.site(), e1z});
    CHECK(tr.steps_taken == 1);
  }
  SUBCASE("two forced steps") {
    Aggregate agg(2);
    agg.insert(z.site(), kE1, -1);
    agg.insert(e1z, kE1, 0);
    const std::vector<int> script{0, 0};
    WalkCursor c(&script, 2, 0);
    const auto tr = advance_particle(c, z, agg);
    CHECK(tr.settle_site == e2z);
    CHECK(*tr.entry_edge == Edge{e1z, e2z});
    CHECK(tr.parent == 1);
    CHECK(tr.radius == 0);
  }
  SUBCASE("step budget") {
    Aggregate agg(2);
    agg.insert(z.site(), kE1, -1);
    agg.insert(e1z, kE1, 0);
    const std::vector<int> script{0, 0};
    WalkCursor c(&script, 2, 0);
    try {
      advance_particle(c, z, agg, 1);
      FAIL("expected StepBudgetExceeded");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::step_budget_exceeded);
    }
  }
}

TEST_CASE("aggregates reject duplicate sites") {
  Aggregate agg(2);
  agg.insert(Site{0, 0}, kE1, -1);
  CHECK_THROWS_AS(agg.insert(Site{0, 0}, kE1, -1), Error);
}

TEST_CASE("schedules") {
  SUBCASE("no tops gives an empty schedule") {
    std::uint64_t seed = 0;
    while (!clock_tops(derive_key(seed, StreamTag::clock, Source{0, 0}, 0), 0.05).empty()) ++seed;
    CHECK(schedule_emissions(seed, 2, 0, 0.05).empty());
    const auto res = build_aggregate_forest(seed, 2, 0, 0.05);
    CHECK(res.aggregate.empty());
    CHECK(forest_of(res.aggregate).vertices.empty());
  }
  SUBCASE("mean length is n times the window size") {
    double total = 0;
    for (std::uint64_t s = 0; s < 200; ++s) total += static_cast<double>(schedule_emissions(s, 2, 2, 3.0).size());
    CHECK(std::abs(total / 200 - 15.0) < 1.2);
  }
  SUBCASE("emissions are strictly ordered") {
    for (std::uint64_t s = 0; s < 100; ++s) {
      const auto sch = schedule_emissions(s, 3, 2, 2.0);
      for (std::size_t i = 1; i < sch.size(); ++i) {
        CHECK(emission_before(sch[i - 1], sch[i]));
        CHECK(sch[i - 1].time < sch[i].time);
      }
    }
  }
  SUBCASE("ties are broken by source then index") {
    const Emission a{Source{0, -1}, 1.0, 2}, b{Source{0, 1}, 1.0, 1}, c{Source{0, 1}, 1.0, 2};
    CHECK(emission_before(a, b));
    CHECK(emission_before(b, c));
    CHECK_FALSE(emission_before(c, b));
  }
}

TEST_CASE("a single emission roots a one-site forest") {
  const std::vector<Emission> sch{{Source{0, 2}, 0.3, 1}};
  WalkScript script;
  script[{Source{0, 2}, 1}] = {};
  const auto res = replay(sch, WalkProvider(script), Aggregate(2), {});
  REQUIRE(res.aggregate.size() == 1);
  const auto f = forest_of(res.aggregate);
  CHECK(f.roots == std::vector<Site>{Site{0, 2}});
  CHECK(f.parent.empty());
}

TEST_CASE("build matches an independent replay of the streams") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 0xDEADBEEFULL, 12345ULL}) {
    for (std::int64_t M : {1, 4}) {
      const double n = M == 1 ? 1.0 : 3.0;
      const auto expect = oracle::replay_d2(seed, M, n);
      const auto got = build_aggregate_forest(seed, 2, M, n);
      REQUIRE(got.aggregate.size() == expect.size());
      for (std::size_t i = 0; i < expect.size(); ++i) {
        const auto& p = got.aggregate.at(i);
        CHECK(p.site == expect[i].site);
        CHECK(p.emission.source == expect[i].source);
        CHECK(p.emission.time == expect[i].time);
        CHECK(p.emission.particle_index == expect[i].j);
        if (expect[i].parent) {
          REQUIRE(p.parent >= 0);
          CHECK(got.aggregate.at(static_cast<std::size_t>(p.parent)).site == *expect[i].parent);
        } else {
          CHECK(p.parent == -1);
        }
      }
    }
  }
}

TEST_CASE("forest invariants and cardinality") {
  for (int d : {2, 3}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      GrowthOptions opts;
      opts.keep_traces = true;
      opts.record_paths = true;
      const auto res = build_aggregate_forest(seed, d, 3, 2.0, opts);
      CHECK(res.aggregate.size() == schedule_emissions(seed, d, 3, 2.0).size());
      CHECK(res.traces.size() == res.aggregate.size());
      check_forest(res.aggregate);
      for (const auto& tr : res.traces) {
        REQUIRE_FALSE(tr.path.empty());
        CHECK(tr.path.front() == tr.emission.source.site());
        CHECK(tr.path.back() == tr.settle_site);
        CHECK(tr.steps_taken + 1 == tr.path.size());
        CHECK(tr.entry_edge.has_value() == (tr.steps_taken > 0));
      }
    }
  }
}

TEST_CASE("roots are exactly sites settled at their own source") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto res = build_aggregate_forest(seed, 2, 5, 2.0);
    for (const auto& p : res.aggregate.order()) {
      CHECK((p.parent < 0) == (p.site == p.emission.source.site()));
    }
  }
}

TEST_CASE("aggregates grow monotonically in n") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = build_aggregate_forest(seed, 2, 4, 1.5).aggregate;
    const auto b = build_aggregate_forest(seed, 2, 4, 3.0).aggregate;
    REQUIRE(a.size() <= b.size());
    // the larger run starts with exactly the smaller one
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a.at(i).site == b.at(i).site);
      CHECK(a.at(i).parent == b.at(i).parent);
    }
    const auto fa = forest_of(a).sorted_edges(), fb = forest_of(b).sorted_edges();
    CHECK(std::includes(fb.begin(), fb.end(), fa.begin(), fa.end()));
  }
}

TEST_CASE("builds are deterministic and independent of the dense box") {
  const auto a = build_aggregate_forest(9, 2, 6, 4.0).aggregate;
  const auto b = build_aggregate_forest(9, 2, 6, 4.0).aggregate;
  const auto sch = schedule_emissions(9, 2, 6, 4.0);
  const auto c = replay(sch, WalkProvider(9), Aggregate(2), {}).aggregate;
  REQUIRE(a.size() == b.size());
  REQUIRE(a.size() == c.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.at(i).site == b.at(i).site);
    CHECK(a.at(i).site == c.at(i).site);
    CHECK(a.at(i).parent == c.at(i).parent);
  }
}

TEST_CASE("level-ordered builds") {
  SUBCASE("no particles gives an empty aggregate") {
    CHECK(build_ordered_aggregate(1, 2, 3, 0.0).aggregate.empty());
  }
  SUBCASE("one source reproduces classical IDLA") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto ordered = build_ordered_aggregate(seed, 2, 0, 20.0).aggregate;
      const auto tops = clock_tops(derive_key(seed, StreamTag::clock, Source{0, 0}, 0), 20.0);
      const auto classic = single_source_aggregate(seed, 2, tops.size());
      CHECK(ordered.sorted_sites() == classic.sorted_sites());
    }
  }
  SUBCASE("same number of sites as the timed build") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      CHECK(build_ordered_aggregate(seed, 2, 3, 2.0).aggregate.size() ==
            build_aggregate_forest(seed, 2, 3, 2.0).aggregate.size());
    }
  }
}

TEST_CASE("single-source aggregates") {
  CHECK(single_source_aggregate(1, 2, 0).empty());
  const auto one = single_source_aggregate(1, 2, 1);
  REQUIRE(one.size() == 1);
  CHECK(one.at(0).site == Site{0, 0});
  const auto many = single_source_aggregate(4, 3, 500);
  CHECK(many.size() == 500);
  check_forest(many);
}
