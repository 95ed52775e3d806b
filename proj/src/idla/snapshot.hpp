#pragma once

// Versioned binary snapshots of one aggregate with its forest and per-particle
// trace digests. Byte layout is documented in docs/snapshot_format.md.

#include <cstdint>
#include <string>
#include <vector>

#include "idla/engine.hpp"

namespace idla {

inline constexpr std::uint32_t kSnapshotSchemaVersion = 1;

enum class BuildMode : std::uint8_t { time_ordered = 0, level_ordered = 1 };
const char* build_mode_name(BuildMode m) noexcept;
BuildMode parse_build_mode(const std::string& text);

struct SnapshotHeader {
  int dim = 2;
  std::int64_t M = 0;
  double n = 0.0;
  std::uint64_t seed = 0;
  BuildMode mode = BuildMode::time_ordered;
  std::uint64_t step_budget = kDefaultStepBudget;
  friend bool operator==(const SnapshotHeader&, const SnapshotHeader&) = default;
};

struct TraceDigest {
  std::uint64_t steps = 0;
  std::int64_t radius = 0;
  friend bool operator==(const TraceDigest&, const TraceDigest&) = default;
};

struct Snapshot {
  SnapshotHeader header;
  std::vector<Site> sites;             // insertion order
  std::vector<Emission> emissions;     // emission that created each site
  std::vector<std::int32_t> parents;   // insertion index of the parent, -1 for roots
  std::vector<TraceDigest> digests;

  std::size_t size() const noexcept { return sites.size(); }
  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

/// Runs the build described by `header` and captures it.
Snapshot simulate(const SnapshotHeader& header);
Snapshot capture(const SnapshotHeader& header, const GrowthResult& result);
/// Rebuilds the aggregate (with its forest) stored in a snapshot.
Aggregate to_aggregate(const Snapshot& snap);

std::vector<std::uint8_t> encode_snapshot(const Snapshot& snap);
Snapshot decode_snapshot(const std::vector<std::uint8_t>& bytes);

void save_snapshot(const Snapshot& snap, const std::string& path);
Snapshot load_snapshot(const std::string& path);

/// CRC-64/XZ (ECMA-182 polynomial, reflected, all-ones init and xorout).
std::uint64_t crc64(const std::uint8_t* data, std::size_t size) noexcept;

struct VerifyReport {
  bool match = false;
  std::string detail;  // first difference when match is false
};

/// Replays the snapshot's header and compares every site, edge and digest.
VerifyReport verify_snapshot(const Snapshot& snap);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace idla
