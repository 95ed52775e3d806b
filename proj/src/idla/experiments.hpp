#pragma once

// Named experiment runners. Each one returns a RunRecord: one JSONL line per
// replicate (or per scanned point), a summary object and a summary CSV.
// Nothing time-dependent goes into a RunRecord, so reruns are byte-identical.

#include <string>
#include <vector>

#include <json.hpp>

#include "idla/config.hpp"

namespace idla {

inline constexpr int kRecordSchemaVersion = 1;

struct RunRecord {
  std::string experiment;
  nlohmann::ordered_json config;
  std::vector<nlohmann::ordered_json> lines;  // per replicate / per point
  nlohmann::ordered_json summary;
  std::vector<std::string> csv_header;
  std::vector<std::vector<nlohmann::ordered_json>> csv_rows;

  RunRecord(std::string name, const Config& cfg);

  /// Wraps `body` with schema version, experiment name and config echo.
  nlohmann::ordered_json envelope(const std::string& kind, nlohmann::ordered_json body) const;
  std::string jsonl() const;
  std::string csv() const;
  /// Writes <prefix>.jsonl and <prefix>.csv.
  void write(const std::string& prefix) const;
};

RunRecord stabilization_scan_forest(const Config& cfg);
RunRecord stabilization_scan_aggregate(const Config& cfg);
RunRecord cone_scan(const Config& cfg);
RunRecord strip_entry_scan(const Config& cfg);
RunRecord translation_test(const Config& cfg);
RunRecord rooted_and_vacant_scan(const Config& cfg);
/// `negative_control` swaps in the one-sided step transform for the ordered arm.
RunRecord abelian_scan(const Config& cfg, bool negative_control = false);
RunRecord coverage_scan(const Config& cfg);
RunRecord radius_tail_scan(const Config& cfg);
RunRecord pi_scan(const Config& cfg);

/// Donut boundaries L = l_0 > l_1 > ... > l_k > M with l_{i+1} = l_i - (2 floor(eps l_i^alpha) + 1).
std::vector<std::int64_t> donut_levels(std::int64_t start_level, std::int64_t M, const ConeSpec& cone);

}  // namespace idla
