#pragma once

// IDLA aggregates and forests built from emission schedules.

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "idla/lattice.hpp"
#include "idla/random.hpp"
#include "idla/site_index.hpp"

namespace idla {

inline constexpr std::uint64_t kDefaultStepBudget = 1'000'000'000ULL;

struct Emission {
  Source source;
  double time = 0.0;
  std::uint32_t particle_index = 0;  // j >= 1

  friend bool operator==(const Emission&, const Emission&) = default;
};

/// Total order on emissions: time, then source (lexicographic), then index.
bool emission_before(const Emission& a, const Emission& b) noexcept;

struct Placement {
  Site site;
  Emission emission;
  std::int32_t parent = -1;  // insertion index of the entry-edge tail, -1 for a root
};

/// Occupied sites in insertion order together with the entry edge of each.
class Aggregate {
 public:
  explicit Aggregate(int dim);
  Aggregate(int dim, const DenseBox& box);

  int dim() const noexcept { return index_.dim(); }
  std::size_t size() const noexcept { return order_.size(); }
  bool empty() const noexcept { return order_.empty(); }
  bool contains(const Site& s) const { return index_.contains(s); }
  std::int32_t find(const Site& s) const { return index_.find(s); }
  const std::vector<Placement>& order() const noexcept { return order_; }
  const Placement& at(std::size_t i) const { return order_[i]; }

  /// Appends a new site; throws if `site` is already occupied.
  std::int32_t insert(const Site& site, const Emission& emission, std::int32_t parent);

  /// Occupied sites sorted lexicographically.
  std::vector<Site> sorted_sites() const;

 private:
  SiteIndex index_;
  std::vector<Placement> order_;
};

struct Edge {
  Site from;
  Site to;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Parent-edge view of an aggregate.
struct Forest {
  std::vector<Site> vertices;
  std::unordered_map<Site, Site> parent;  // child -> parent
  std::vector<Site> roots;

  std::vector<Edge> sorted_edges() const;
};

Forest forest_of(const Aggregate& agg);

struct ParticleTrace {
  Emission emission;
  std::vector<Site> path;  // filled only when paths are recorded
  Site settle_site;
  std::optional<Edge> entry_edge;
  std::int32_t parent = -1;
  std::uint64_t steps_taken = 0;
  std::int64_t radius = 0;     // max ||p_H(path site) - source||
  std::int64_t max_level = 0;  // max ||p_H(path site)||
};

/// Walks from `start` until the first site outside `agg`. `anchor` is the
/// source used for the projected radius (equal to start for fresh particles).
ParticleTrace advance_particle(WalkCursor& walk, const Site& start, const Source& anchor, const Aggregate& agg,
                               std::uint64_t step_budget, bool record_path);

/// Convenience overload for a fresh particle: walk starts at its source.
ParticleTrace advance_particle(WalkCursor& walk, const Source& start, const Aggregate& agg,
                               std::uint64_t step_budget = kDefaultStepBudget, bool record_path = true);

struct GrowthOptions {
  std::uint64_t step_budget = kDefaultStepBudget;
  bool keep_traces = false;
  bool record_paths = false;
};

struct GrowthResult {
  Aggregate aggregate;
  std::vector<ParticleTrace> traces;  // emission order; empty unless keep_traces
};

/// All tops in [0,n] of all sources in `window`, merged in emission order.
std::vector<Emission> schedule_emissions(std::uint64_t seed, const SourceBox& window, double n);
std::vector<Emission> schedule_emissions(std::uint64_t seed, int dim, std::int64_t M, double n);

/// Sequential replay of a schedule: each particle settles at its first exit.
GrowthResult replay(const std::vector<Emission>& schedule, const WalkProvider& walks, Aggregate initial,
                    const GrowthOptions& opts);

/// A-dagger_n[M] with its forest (time-ordered emissions).
GrowthResult build_aggregate_forest(std::uint64_t seed, int dim, std::int64_t M, double n,
                                    const GrowthOptions& opts = {});
GrowthResult build_aggregate_forest(std::uint64_t seed, const SourceBox& window, double n,
                                    const GrowthOptions& opts = {});

/// A*_n[M]: every source sends its N_z particles in turn, sources ordered by
/// level then lexicographically. Uses the same walk streams as the timed build.
GrowthResult build_ordered_aggregate(std::uint64_t seed, int dim, std::int64_t M, double n,
                                     const GrowthOptions& opts = {},
                                     StepTransform transform = StepTransform::none);

/// Classical single-source IDLA with `count` particles from the origin.
Aggregate single_source_aggregate(std::uint64_t seed, int dim, std::uint64_t count,
                                  std::uint64_t step_budget = kDefaultStepBudget);

}  // namespace idla
