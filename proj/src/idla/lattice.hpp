#pragma once

// Geometry of Z^d with the source hyperplane H = {0} x Z^{d-1}: sites,
// sources, strips, hyperplane balls, cones and translations.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "idla/error.hpp"

namespace idla {

inline constexpr int kMinDim = 2;
inline constexpr int kMaxDim = 4;

using Coord = std::int32_t;

void check_dimension(int dim);

/// A point of Z^d, 2 <= d <= 4. Unused trailing coordinates are kept at zero.
class Site {
 public:
  Site() = default;
  explicit Site(int dim);
  Site(std::initializer_list<std::int64_t> coords);
  static Site from_span(const std::int64_t* coords, int dim);

  int dim() const noexcept { return dim_; }
  Coord operator[](int i) const noexcept { return c_[static_cast<std::size_t>(i)]; }
  Coord& operator[](int i) noexcept { return c_[static_cast<std::size_t>(i)]; }
  const std::array<Coord, kMaxDim>& coords() const noexcept { return c_; }

  /// Unit step along direction `dir` in [0, 2d): axis dir/2, sign + for even.
  Site stepped(int dir) const;

  friend bool operator==(const Site&, const Site&) = default;
  /// Lexicographic order on (dim, coords).
  friend auto operator<=>(const Site&, const Site&) = default;

  std::string to_string() const;

 private:
  std::array<Coord, kMaxDim> c_{};
  int dim_ = kMinDim;
};

/// A site of H (first coordinate zero).
class Source {
 public:
  Source() = default;
  explicit Source(const Site& s);
  Source(std::initializer_list<std::int64_t> coords) : Source(Site(coords)) {}
  static Source origin(int dim) { return Source(Site(dim)); }

  const Site& site() const noexcept { return site_; }
  int dim() const noexcept { return site_.dim(); }
  Coord operator[](int i) const noexcept { return site_[i]; }

  friend bool operator==(const Source&, const Source&) = default;
  friend auto operator<=>(const Source&, const Source&) = default;

 private:
  Site site_;
};

/// Non-negative rational number with 64-bit numerator and denominator.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  /// Accepts "p/q", plain integers, decimals and scientific notation.
  static Rational parse(std::string_view text);
  double to_double() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
  std::string to_string() const;
  friend bool operator==(const Rational&, const Rational&) = default;
};

struct ConeSpec {
  Rational epsilon;
  Rational alpha;

  ConeSpec() = default;
  ConeSpec(Rational eps, Rational a);
};

std::int64_t inf_norm(const Site& s) noexcept;
Source project_to_hyperplane(const Site& s) noexcept;
/// True iff |coords[i]| <= K for all i >= 1.
bool in_strip(const Site& s, std::int64_t K) noexcept;
/// Hyperplane balls B(z1,r1) and B(z2,r2) (l-infinity cubes) intersect.
bool hball_overlap(const Source& z1, std::int64_t r1, const Source& z2, std::int64_t r2);
/// |s_1| <= eps * l^alpha with l = ||p_H(s)||, decided in exact integer arithmetic.
bool cone_contains(const Site& s, const ConeSpec& cone);
Site translate(const Site& s, const Source& k);
Site negate(const Source& k);

/// Distance ||p_H(a) - p_H(b)|| between the hyperplane projections.
std::int64_t hyperplane_distance(const Site& a, const Site& b) noexcept;

/// Cached floor(eps * l^alpha) per level l, each entry decided by cone_contains.
class ConeTable {
 public:
  explicit ConeTable(const ConeSpec& cone) : cone_(cone) {}
  std::int64_t max_first_coord(std::int64_t level);
  bool contains(const Site& s) {
    std::int64_t a = s[0] < 0 ? -static_cast<std::int64_t>(s[0]) : s[0];
    return a <= max_first_coord(hyperplane_level(s));
  }
  static std::int64_t hyperplane_level(const Site& s) noexcept;
  const ConeSpec& spec() const noexcept { return cone_; }

 private:
  ConeSpec cone_;
  std::vector<std::int64_t> cache_;
};

/// Hyperplane ball B(center, radius) viewed as a set of sources.
struct SourceBox {
  Source center;
  std::int64_t radius = 0;

  static SourceBox window(int dim, std::int64_t M) { return {Source::origin(dim), M}; }
  bool contains(const Source& z) const noexcept;
  std::size_t size() const;
  /// Sources in lexicographic order.
  std::vector<Source> enumerate() const;
  /// Sources ordered by level ||z - center|| then lexicographically.
  std::vector<Source> enumerate_by_level() const;
};

/// Number of sources z of H with ||z|| == r.
std::int64_t hyperplane_sphere_size(int dim, std::int64_t r);

}  // namespace idla

template <>
struct std::hash<idla::Site> {
  std::size_t operator()(const idla::Site& s) const noexcept {
    std::uint64_t h = 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(s.dim());
    for (int i = 0; i < idla::kMaxDim; ++i) {
      h ^= static_cast<std::uint32_t>(s[i]) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    }
    h ^= h >> 31;
    h *= 0xBF58476D1CE4E5B9ULL;
    h ^= h >> 29;
    return static_cast<std::size_t>(h);
  }
};

template <>
struct std::hash<idla::Source> {
  std::size_t operator()(const idla::Source& s) const noexcept { return std::hash<idla::Site>{}(s.site()); }
};
