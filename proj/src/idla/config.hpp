#pragma once

// Flat key = value configuration shared by every subcommand. Files use a
// TOML-compatible subset: one key per line, '#' comments, numbers, quoted
// strings, booleans and (nested) arrays. Unknown keys are errors.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "idla/lattice.hpp"

namespace idla {

struct Config {
  int dim = 2;
  std::int64_t M = 10;
  std::int64_t M_prime = 20;
  double n = 1.0;
  std::uint64_t seed = 1;
  std::uint64_t seeds = 10;
  unsigned threads = 1;
  std::uint64_t step_budget = 1'000'000'000ULL;
  std::string out;
  std::string input;
  std::string mode = "time";     // time | level
  std::string style = "forest";  // forest | coupling
  std::int64_t K = 5;
  std::vector<std::int64_t> grid;
  std::vector<std::int64_t> windows;
  Rational cone_eps{2, 1};
  Rational alpha{3, 5};
  double eps = 0.1;
  std::vector<double> eps_grid;
  std::vector<std::int64_t> M_grid;
  double T = 2.0;
  std::int64_t M_ref = 64;
  std::uint64_t trials = 2000;
  std::int64_t region = 16;
  std::int64_t K0 = 0;
  std::int64_t target_level = 10;
  std::vector<std::int64_t> levels;
  std::uint64_t walks = 10000;
  std::vector<std::vector<std::int64_t>> shifts;
  std::vector<std::vector<std::int64_t>> sites;
  std::int64_t coverage_radius = -1;
  std::vector<double> n_grid;
  double slack = 0.0;
  double significance = 0.01;
  std::int64_t height = 200;
  std::uint64_t records = 0;

  /// Sets one key from its textual value (file syntax). Throws ConfigError.
  void set(std::string_view key, std::string_view value);
  /// Parses a whole file body; later keys override earlier ones.
  void load_text(std::string_view text, const std::string& origin = "<text>");
  void load_file(const std::string& path);

  /// Checks cross-key constraints shared by all commands.
  void validate() const;

  /// Every key except `threads` (which never changes results), in a fixed order.
  nlohmann::ordered_json echo() const;
  /// Round-trippable file form of echo().
  std::string to_text() const;

  static const std::vector<std::string>& keys();
};

}  // namespace idla
