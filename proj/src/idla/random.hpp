#pragma once

// Counter-based random streams. Every clock top and every walk step is a pure
// function of (master seed, stream tag, source, particle index, position), so
// two simulations over different source windows read identical randomness
// for every source they share.

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "idla/lattice.hpp"

namespace idla {

using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
PhiloxBlock philox4x32_10(PhiloxBlock ctr, PhiloxKey key) noexcept;

/// SplitMix64 finalizer; used to derive per-replicate master seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t index) noexcept;

enum class StreamTag : std::uint8_t { clock = 0, walk = 1 };

inline constexpr std::int64_t kMaxKeyCoord = std::int64_t{1} << 20;
inline constexpr std::uint32_t kMaxParticleIndex = 1u << 20;

/// Fully identifies one stream. `id_hi:id_lo` packs (tag, source, index)
/// injectively into 88 bits; the remaining 40 counter bits address blocks.
struct StreamKey {
  std::uint64_t master_seed = 0;
  StreamTag tag = StreamTag::clock;
  Source source;
  std::uint32_t particle_index = 0;
  std::uint64_t id_hi = 0;
  std::uint32_t id_lo = 0;  // low 24 bits used

  PhiloxBlock block(std::uint64_t index) const noexcept;
  friend bool operator==(const StreamKey& a, const StreamKey& b) {
    return a.master_seed == b.master_seed && a.id_hi == b.id_hi && a.id_lo == b.id_lo;
  }
};

/// Clock streams use particle index 0, walk streams j >= 1.
StreamKey derive_key(std::uint64_t master, StreamTag tag, const Source& z, std::uint32_t j);

/// Uniform in the open interval (0,1) from 64 random bits.
inline double uniform_open(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Strictly increasing tops of the intensity-1 Poisson clock in (0, t].
std::vector<double> clock_tops(const StreamKey& key, double t);

/// Step transform used only for negative controls in statistical tests.
enum class StepTransform : std::uint8_t { none, one_sided_first_axis };

/// Scripted step sequences for hand-traced fixtures: (source, j) -> directions.
using WalkScript = std::map<std::pair<Source, std::uint32_t>, std::vector<int>>;

/// Sequential reader over one walk stream with random access on construction.
class WalkCursor {
 public:
  WalkCursor(const StreamKey& key, int dim, std::uint64_t start, StepTransform transform);
  WalkCursor(const std::vector<int>* script, int dim, std::uint64_t start);

  /// Direction in [0, 2d) of the step at index(), then advances.
  int next() {
    int dir;
    if (script_) {
      if (index_ >= script_->size()) throw_script_exhausted();
      dir = (*script_)[static_cast<std::size_t>(index_)];
    } else {
      const unsigned lane = static_cast<unsigned>(index_ & 3u);
      if (lane == 0 || !cached_) refill();
      dir = static_cast<int>((static_cast<std::uint64_t>(cache_[lane]) * two_d_) >> 32);
      if (transform_ == StepTransform::one_sided_first_axis && dir == 0) dir = 1;
    }
    ++index_;
    return dir;
  }
  std::uint64_t index() const noexcept { return index_; }

 private:
  void refill() noexcept {
    cache_ = key_.block(index_ >> 2);
    cached_ = true;
  }
  [[noreturn]] void throw_script_exhausted() const;

  StreamKey key_;
  const std::vector<int>* script_ = nullptr;
  std::uint64_t index_ = 0;
  std::uint32_t two_d_ = 4;
  StepTransform transform_ = StepTransform::none;
  PhiloxBlock cache_{};
  bool cached_ = false;
};

/// Direction of step `i` of a walk stream (random access).
int walk_step(const StreamKey& key, int dim, std::uint64_t i);

/// Source of walk cursors for a simulation: counter-based by default, or a
/// script for fixtures.
class WalkProvider {
 public:
  explicit WalkProvider(std::uint64_t master, StepTransform transform = StepTransform::none)
      : master_(master), transform_(transform) {}
  explicit WalkProvider(WalkScript script)
      : script_(std::make_shared<const WalkScript>(std::move(script))) {}

  WalkCursor cursor(const Source& z, std::uint32_t j, std::uint64_t start = 0) const;
  std::uint64_t master() const noexcept { return master_; }

 private:
  std::uint64_t master_ = 0;
  StepTransform transform_ = StepTransform::none;
  std::shared_ptr<const WalkScript> script_;
};

/// Parses a 64-bit seed given in decimal or 0x-prefixed hex.
std::uint64_t parse_seed(const std::string& text);

}  // namespace idla
