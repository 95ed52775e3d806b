#include <doctest.h>

#include "idla/config.hpp"

using namespace idla;

namespace {
ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::invalid_argument;
}
}  // namespace

TEST_CASE("config file parsing") {
  Config c;
  c.load_text(R"(# a comment
dim = 3
M = 12        # trailing comment
n = 2.5
seed = 0x10
grid = [10, 20, 40]
shifts = [[0, 5, 0], [0, -50, 1]]
alpha = "4/5"
cone_eps = 1
mode = "level"
)");
  CHECK(c.dim == 3);
  CHECK(c.M == 12);
  CHECK(c.n == 2.5);
  CHECK(c.seed == 16);
  CHECK(c.grid == std::vector<std::int64_t>{10, 20, 40});
  REQUIRE(c.shifts.size() == 2);
  CHECK(c.shifts[1] == std::vector<std::int64_t>{0, -50, 1});
  CHECK(c.alpha == Rational{4, 5});
  CHECK(c.cone_eps == Rational{1, 1});
  CHECK(c.mode == "level");
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config errors") {
  Config c;
  CHECK(code_of([&] { c.set("bogus", "1"); }) == ErrorCode::config);
  CHECK(code_of([&] { c.set("M", "abc"); }) == ErrorCode::config);
  CHECK(code_of([&] { c.set("grid", "[1, 2"); }) == ErrorCode::config);
  try {
    c.load_text("M = 3\nwhat = 4\n", "cfg.toml");
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config);
    CHECK(std::string(e.what()).find("cfg.toml:2") != std::string::npos);
  }
  Config d;
  d.dim = 5;
  CHECK(code_of([&] { d.validate(); }) == ErrorCode::unsupported_dimension);
  Config m;
  m.mode = "sideways";
  CHECK(code_of([&] { m.validate(); }) == ErrorCode::config);
  Config s;
  s.set("shifts", "[[0, 1, 2]]");
  CHECK(code_of([&] { s.validate(); }) == ErrorCode::config);
  CHECK(code_of([&] { Config().load_file("/nonexistent/file.toml"); }) != ErrorCode::invalid_argument);
}

TEST_CASE("config echo and round trip") {
  Config c;
  c.set("M", "7");
  c.set("threads", "4");
  c.set("out", "\"somewhere\"");
  c.set("eps_grid", "[0.001, 0.01]");
  const auto echo = c.echo();
  CHECK(echo["M"] == 7);
  CHECK_FALSE(echo.contains("threads"));
  CHECK_FALSE(echo.contains("out"));
  CHECK_FALSE(echo.contains("input"));

  Config back;
  back.load_text(c.to_text());
  CHECK(back.echo() == echo);
  CHECK(back.M == 7);
  CHECK(back.eps_grid == std::vector<double>{0.001, 0.01});

  for (const auto& k : Config::keys()) CHECK_FALSE(k.empty());
  CHECK(Config::keys().size() == echo.size() + 3);
}
