#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "idla/lattice.hpp"

namespace idla {

/// Axis-aligned box of Z^d given by per-axis half widths around `center`.
struct DenseBox {
  Site center;
  std::array<std::int64_t, kMaxDim> half{};

  /// Box sized for aggregates grown from `sources` over a horizon `n`.
  static DenseBox for_strip(const SourceBox& sources, double n);
  /// Box sized for a single-source aggregate of `count` particles.
  static DenseBox for_ball(int dim, std::uint64_t count);
  std::uint64_t cells() const noexcept;
};

/// Site -> insertion index map. Reads inside the dense box hit a flat array;
/// anything outside falls back to a hash map.
class SiteIndex {
 public:
  explicit SiteIndex(int dim);
  SiteIndex(int dim, const DenseBox& box);

  /// Insertion index of `s`, or -1.
  std::int32_t find(const Site& s) const {
    const std::int64_t off = dense_offset(s);
    if (off >= 0) return dense_[static_cast<std::size_t>(off)];
    if (sparse_.empty()) return -1;
    auto it = sparse_.find(s);
    return it == sparse_.end() ? -1 : it->second;
  }
  bool contains(const Site& s) const { return find(s) >= 0; }
  /// Returns false if already present.
  bool insert(const Site& s, std::int32_t index);

  int dim() const noexcept { return dim_; }

 private:
  std::int64_t dense_offset(const Site& s) const noexcept {
    if (dense_.empty()) return -1;
    std::int64_t off = 0;
    for (int i = 0; i < dim_; ++i) {
      const std::int64_t rel = static_cast<std::int64_t>(s[i]) - low_[static_cast<std::size_t>(i)];
      if (static_cast<std::uint64_t>(rel) >= static_cast<std::uint64_t>(extent_[static_cast<std::size_t>(i)])) {
        return -1;
      }
      off = off * extent_[static_cast<std::size_t>(i)] + rel;
    }
    return off;
  }

  int dim_;
  std::array<std::int64_t, kMaxDim> low_{};
  std::array<std::int64_t, kMaxDim> extent_{};
  std::vector<std::int32_t> dense_;
  std::unordered_map<Site, std::int32_t> sparse_;
};

}  // namespace idla
