#include "idla/random.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <string>

namespace idla {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline void philox_round(PhiloxBlock& ctr, const PhiloxKey& key) noexcept {
  std::uint32_t hi0, lo0, hi1, lo1;
  mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
  mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
  ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

constexpr int kCoordBits = 22;
constexpr int kIndexBits = 21;

}  // namespace

PhiloxBlock philox4x32_10(PhiloxBlock ctr, PhiloxKey key) noexcept {
  philox_round(ctr, key);
  for (int r = 1; r < 10; ++r) {
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
    philox_round(ctr, key);
  }
  return ctr;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x5851F42D4C957F2DULL));
}

PhiloxBlock StreamKey::block(std::uint64_t index) const noexcept {
  const PhiloxBlock ctr{
      static_cast<std::uint32_t>(index),
      (id_lo << 8) | static_cast<std::uint32_t>((index >> 32) & 0xFFu),
      static_cast<std::uint32_t>(id_hi),
      static_cast<std::uint32_t>(id_hi >> 32),
  };
  const PhiloxKey key{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32)};
  return philox4x32_10(ctr, key);
}

StreamKey derive_key(std::uint64_t master, StreamTag tag, const Source& z, std::uint32_t j) {
  if (tag == StreamTag::clock && j != 0) {
    throw Error(ErrorCode::invalid_argument, "clock streams use particle index 0");
  }
  if (j > kMaxParticleIndex) {
    throw Error(ErrorCode::invalid_argument, "particle index exceeds 2^20");
  }
  // 88-bit id: [tag:1][c1:22][c2:22][c3:22][j:21], most significant first.
  unsigned __int128 id = static_cast<unsigned>(tag);
  for (int i = 1; i < kMaxDim; ++i) {
    std::int64_t c = i < z.dim() ? z[i] : 0;
    if (c < -kMaxKeyCoord || c > kMaxKeyCoord) {
      throw Error(ErrorCode::invalid_argument, "source coordinate outside the key-derivable range 2^20");
    }
    id = (id << kCoordBits) | static_cast<unsigned __int128>(c + kMaxKeyCoord);
  }
  id = (id << kIndexBits) | j;

  StreamKey key;
  key.master_seed = master;
  key.tag = tag;
  key.source = z;
  key.particle_index = j;
  key.id_lo = static_cast<std::uint32_t>(id & 0xFFFFFFu);
  key.id_hi = static_cast<std::uint64_t>(id >> 24);
  return key;
}

std::vector<double> clock_tops(const StreamKey& key, double t) {
  if (key.tag != StreamTag::clock) throw Error(ErrorCode::invalid_argument, "clock_tops needs a clock stream");
  if (!(t >= 0.0)) throw Error(ErrorCode::invalid_argument, "clock window must be non-negative");
  std::vector<double> tops;
  double time = 0.0;
  for (std::uint64_t b = 0;; ++b) {
    const PhiloxBlock blk = key.block(b);
    for (int half = 0; half < 2; ++half) {
      const std::uint64_t bits =
          (static_cast<std::uint64_t>(blk[2 * half + 1]) << 32) | blk[2 * half];
      time += -std::log(uniform_open(bits));
      if (time > t) return tops;
      tops.push_back(time);
    }
  }
}

WalkCursor::WalkCursor(const StreamKey& key, int dim, std::uint64_t start, StepTransform transform)
    : key_(key), index_(start), two_d_(static_cast<std::uint32_t>(2 * dim)), transform_(transform) {
  if (key.tag != StreamTag::walk) throw Error(ErrorCode::invalid_argument, "walk cursor needs a walk stream");
}

WalkCursor::WalkCursor(const std::vector<int>* script, int dim, std::uint64_t start)
    : script_(script), index_(start), two_d_(static_cast<std::uint32_t>(2 * dim)) {}

void WalkCursor::throw_script_exhausted() const {
  throw Error(ErrorCode::invalid_argument, "scripted walk exhausted at step " + std::to_string(index_));
}

int walk_step(const StreamKey& key, int dim, std::uint64_t i) {
  WalkCursor c(key, dim, i, StepTransform::none);
  return c.next();
}

WalkCursor WalkProvider::cursor(const Source& z, std::uint32_t j, std::uint64_t start) const {
  if (script_) {
    auto it = script_->find({z, j});
    if (it == script_->end()) {
      throw Error(ErrorCode::invalid_argument,
                  "no scripted walk for source " + z.site().to_string() + " particle " + std::to_string(j));
    }
    return WalkCursor(&it->second, z.dim(), start);
  }
  return WalkCursor(derive_key(master_, StreamTag::walk, z, j), z.dim(), start, transform_);
}

std::uint64_t parse_seed(const std::string& text) {
  if (text.empty() || text[0] == '-') throw Error(ErrorCode::invalid_argument, "invalid seed '" + text + "'");
  const bool hex = text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X');
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text.c_str() + (hex ? 2 : 0), &end, hex ? 16 : 10);
  if (errno != 0 || end == nullptr || *end != '\0' || end == text.c_str() + (hex ? 2 : 0)) {
    throw Error(ErrorCode::invalid_argument, "invalid seed '" + text + "'");
  }
  return static_cast<std::uint64_t>(v);
}

}  // namespace idla
