#pragma once

// Natural and special couplings of aggregates grown over nested source
// windows, discrepancy classification and chains of changes.

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "idla/engine.hpp"

namespace idla {

/// What one particle did in one window of a ladder.
struct WindowOutcome {
  bool participates = false;
  Site settle;
  std::optional<Site> parent_site;
  std::uint64_t steps = 0;
  std::int64_t radius = 0;
};

struct CouplingEvent {
  Emission emission;
  std::vector<WindowOutcome> per_window;
};

enum class AuditLevel { incremental, full };

struct CouplingLadder {
  std::vector<std::int64_t> windows;
  std::vector<Aggregate> states;
  std::uint64_t master_seed = 0;
  std::vector<CouplingEvent> log;
  /// Number of (event, window pair) inclusion checks performed.
  std::uint64_t inclusion_checks = 0;
  /// Number of failed checks (0 for a correct implementation).
  std::uint64_t inclusion_failures = 0;
};

struct LadderOptions {
  std::uint64_t step_budget = kDefaultStepBudget;
  AuditLevel audit = AuditLevel::incremental;
  bool keep_log = true;
};

/// Natural coupling over any increasing list of windows: one schedule over
/// the largest window, each particle walks the same stream in every window
/// whose sources contain it, smallest window first.
CouplingLadder run_natural_ladder(std::uint64_t seed, int dim, const std::vector<std::int64_t>& windows, double n,
                                  const LadderOptions& opts = {});
/// Same with an explicit schedule and walk provider (fixtures).
CouplingLadder run_natural_ladder(const std::vector<Emission>& schedule, const WalkProvider& walks, int dim,
                                  const std::vector<std::int64_t>& windows, const LadderOptions& opts = {});

CouplingLadder run_natural_coupling(std::uint64_t seed, int dim, std::int64_t M, std::int64_t M_prime, double n,
                                    const LadderOptions& opts = {});

/// Who created a discrepancy site in the special coupling: the particle's
/// emission plus the step index where its walk is suspended.
struct SuspendedWalk {
  Emission origin;
  std::uint64_t resume_index = 0;
};

enum class SpecialCase { outer, fresh, wake_up };

struct SpecialEvent {
  Emission emission;
  SpecialCase kind = SpecialCase::outer;
  Site small_site;   // site added to the smaller aggregate (fresh / wake_up)
  Site large_site;   // site added to the larger aggregate
  std::optional<Emission> woken;  // wake_up only
};

struct SpecialCoupling {
  std::int64_t M = 0;
  std::int64_t M_prime = 0;
  Aggregate small;
  Aggregate large;
  std::map<Site, SuspendedWalk> suspended;  // keyed by discrepancy site
  std::vector<SpecialEvent> log;
  std::uint64_t audits = 0;
};

/// Special coupling; throws AuditViolation if inclusion or the outer-origin
/// condition on discrepancies fails at any step.
SpecialCoupling run_special_coupling(std::uint64_t seed, int dim, std::int64_t M, std::int64_t M_prime, double n,
                                     std::uint64_t step_budget = kDefaultStepBudget);
SpecialCoupling run_special_coupling(const std::vector<Emission>& schedule, const WalkProvider& walks, int dim,
                                     std::int64_t M, std::int64_t M_prime,
                                     std::uint64_t step_budget = kDefaultStepBudget);

struct DiscrepancyReport {
  std::vector<Site> red;                // larger only
  std::vector<Site> blue;               // common, different particle or different entry edge
  std::vector<Site> blue_by_emission;   // common, reached by different particles
  std::vector<Site> blue_by_edge;       // common, different entry edge
  std::vector<Edge> green_edges;        // edges of both forests
};

/// Requires small ⊆ large.
DiscrepancyReport classify_discrepancies(const Aggregate& small, const Aggregate& large);

struct Relay {
  Emission emission;
  std::optional<Site> visited;  // discrepancy visited (absent for the originating particle)
  Site created;                 // discrepancy created in the larger aggregate
  std::int64_t radius = 0;      // projected radius of the walk until exit of the larger aggregate
};

struct ChainOfChanges {
  std::vector<Relay> relays;
  std::int64_t originating_level = 0;

  /// Some relay ball meets the hyperplane window H_K.
  bool reaches_strip(std::int64_t K) const;
};

/// Chains between windows `small_idx` and `large_idx` of a natural ladder log.
std::vector<ChainOfChanges> extract_chains(const CouplingLadder& ladder, std::size_t small_idx,
                                           std::size_t large_idx);

/// Vertices inside Z_K and parent edges with both endpoints in Z_K agree.
bool forest_window_equal(const Forest& a, const Forest& b, std::int64_t K);

}  // namespace idla
