#include <doctest.h>

#include <bit>
#include <cmath>
#include <random>
#include <set>
#include <unordered_set>

#include "idla/engine.hpp"
#include "idla/random.hpp"

using namespace idla;

TEST_CASE("philox4x32-10 known answers") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == PhiloxBlock{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        PhiloxBlock{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        PhiloxBlock{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("seed parsing") {
  CHECK(parse_seed("42") == 42);
  CHECK(parse_seed("0x10") == 16);
  CHECK(parse_seed("18446744073709551615") == ~std::uint64_t{0});
  CHECK_THROWS_AS(parse_seed("-1"), Error);
  CHECK_THROWS_AS(parse_seed("0xZZ"), Error);
  CHECK_THROWS_AS(parse_seed(""), Error);
}

TEST_CASE("replicate seeds are distinct") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(replicate_seed(7, i));
  CHECK(seen.size() == 10000);
  CHECK(replicate_seed(7, 3) == replicate_seed(7, 3));
  CHECK(replicate_seed(7, 3) != replicate_seed(8, 3));
}

TEST_CASE("key derivation arguments") {
  CHECK_THROWS_AS(derive_key(1, StreamTag::clock, Source{0, 0}, 1), Error);
  CHECK_THROWS_AS(derive_key(1, StreamTag::walk, Source{0, 0}, kMaxParticleIndex + 1), Error);
  CHECK_THROWS_AS(derive_key(1, StreamTag::walk, Source{0, kMaxKeyCoord + 1}, 1), Error);
  CHECK(derive_key(1, StreamTag::walk, Source{0, 5}, 3) == derive_key(1, StreamTag::walk, Source{0, 5}, 3));
  CHECK_FALSE(derive_key(1, StreamTag::walk, Source{0, 5}, 3) == derive_key(2, StreamTag::walk, Source{0, 5}, 3));
}

TEST_CASE("clock tops are increasing and prefix stable") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto key = derive_key(seed, StreamTag::clock, Source{0, static_cast<std::int64_t>(seed % 7)}, 0);
    const auto a = clock_tops(key, 5.0);
    const auto b = clock_tops(key, 10.0);
    REQUIRE(a.size() <= b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    for (std::size_t i = a.size(); i < b.size(); ++i) CHECK(b[i] > 5.0);
    for (std::size_t i = 1; i < b.size(); ++i) CHECK(b[i] > b[i - 1]);
    CHECK(clock_tops(key, 0.0).empty());
  }
  CHECK_THROWS_AS(clock_tops(derive_key(1, StreamTag::walk, Source{0, 0}, 1), 1.0), Error);
}

TEST_CASE("clock counts follow a unit-rate Poisson law") {
  const int keys = 10000;
  double total = 0;
  int zeros = 0;
  for (int k = 0; k < keys; ++k) {
    const auto tops = clock_tops(derive_key(99, StreamTag::clock, Source{0, k - 5000}, 0), 1.0);
    total += static_cast<double>(tops.size());
    zeros += tops.empty();
  }
  // mean 1 with standard error 0.01, P(0) = e^-1 with standard error 0.0048
  CHECK(std::abs(total / keys - 1.0) < 0.04);
  CHECK(std::abs(static_cast<double>(zeros) / keys - std::exp(-1.0)) < 0.015);
}

TEST_CASE("walk steps are deterministic and uniform") {
  const auto key = derive_key(3, StreamTag::walk, Source{0, 1}, 2);
  for (std::uint64_t i = 0; i < 50; ++i) CHECK(walk_step(key, 2, i) == walk_step(key, 2, i));

  std::array<int, 4> freq{};
  WalkCursor c(key, 2, 0, StepTransform::none);
  for (int i = 0; i < 100000; ++i) {
    const int dir = c.next();
    REQUIRE(dir >= 0);
    REQUIRE(dir < 4);
    ++freq[static_cast<std::size_t>(dir)];
  }
  for (int f : freq) CHECK(std::abs(f / 100000.0 - 0.25) < 0.01);

  // the sequential cursor reads exactly the random-access stream, from any start
  WalkCursor mid(key, 2, 13, StepTransform::none);
  for (std::uint64_t i = 13; i < 40; ++i) CHECK(mid.next() == walk_step(key, 2, i));
}

TEST_CASE("walk displacement is diffusive") {
  const int walks = 2000, steps = 100;
  double sq = 0;
  for (int w = 0; w < walks; ++w) {
    WalkCursor c(derive_key(4, StreamTag::walk, Source{0, 0, 0}, static_cast<std::uint32_t>(w + 1)), 3, 0,
                 StepTransform::none);
    std::array<int, 3> x{};
    for (int s = 0; s < steps; ++s) {
      const int dir = c.next();
      x[static_cast<std::size_t>(dir / 2)] += dir % 2 == 0 ? 1 : -1;
    }
    sq += x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
  }
  CHECK(std::abs(sq / walks - steps) < 10.0);
}

TEST_CASE("one-sided transform never steps down the first axis") {
  WalkCursor c(derive_key(4, StreamTag::walk, Source{0, 0}, 1), 2, 0, StepTransform::one_sided_first_axis);
  for (int i = 0; i < 1000; ++i) CHECK(c.next() != 0);
}

TEST_CASE("no key collisions over a million stream identities") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::int64_t> coord(-(1 << 19), 1 << 19);
  std::uniform_int_distribution<std::uint32_t> idx(1, kMaxParticleIndex);
  struct PairHash {
    std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& p) const noexcept {
      return std::hash<std::uint64_t>{}(p.first * 0x9E3779B97F4A7C15ULL ^ p.second);
    }
  };
  std::unordered_set<std::pair<std::uint64_t, std::uint64_t>, PairHash> inputs, ids, outputs;
  inputs.reserve(1 << 21);
  ids.reserve(1 << 21);
  outputs.reserve(1 << 21);
  for (int t = 0; t < 1000000; ++t) {
    const std::int64_t a = coord(rng), b = coord(rng);
    const std::uint32_t j = idx(rng);
    const Source z{0, a, b};
    if (!inputs.insert({static_cast<std::uint64_t>(a) << 32 ^ static_cast<std::uint32_t>(b), j}).second) continue;
    const auto key = derive_key(77, StreamTag::walk, z, j);
    ids.insert({key.id_hi, key.id_lo});
    const auto blk = key.block(0);
    outputs.insert({static_cast<std::uint64_t>(blk[0]) << 32 | blk[1], static_cast<std::uint64_t>(blk[2]) << 32 | blk[3]});
  }
  CHECK(ids.size() == inputs.size());
  CHECK(outputs.size() == inputs.size());
}

TEST_CASE("neighbouring particle indices give unrelated output") {
  double bits = 0;
  const int n = 1000;
  for (int t = 0; t < n; ++t) {
    const Source z{0, t % 31 - 15};
    const auto a = derive_key(5, StreamTag::walk, z, static_cast<std::uint32_t>(t + 1)).block(0);
    const auto b = derive_key(5, StreamTag::walk, z, static_cast<std::uint32_t>(t + 2)).block(0);
    const std::uint64_t x = (static_cast<std::uint64_t>(a[0] ^ b[0]) << 32) | (a[1] ^ b[1]);
    CHECK(x != 0);
    bits += std::popcount(x);
  }
  CHECK(std::abs(bits / n - 32.0) < 1.0);
}

TEST_CASE("different windows read the same clocks for shared sources") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto small = schedule_emissions(seed, 2, 3, 2.0);
    const auto large = schedule_emissions(seed, 2, 6, 2.0);
    std::vector<Emission> restricted;
    for (const auto& e : large)
      if (SourceBox::window(2, 3).contains(e.source)) restricted.push_back(e);
    CHECK(restricted == small);
  }
}
