#pragma once

// Projected radii of starting points against frozen reference aggregates,
// discrete Boolean models on H, clusters, descending chains and the
// localized percolation event G.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "idla/engine.hpp"
#include "idla/stats.hpp"

namespace idla {

struct StartingPoint {
  Source source;
  double time = 0.0;
  std::uint32_t particle_index = 0;
};

struct RadiusRecord {
  StartingPoint start;
  std::int64_t radius = 0;
  std::string reference;  // e.g. "window:64" or "ball:(0,0):160"
  std::uint64_t steps = 0;
  std::int64_t max_level = 0;
  bool trusted = true;  // walk stayed well inside the reference window
};

/// max over path sites of ||p_H(site) - source||; falls back to the stored
/// radius when the path was not recorded.
std::int64_t trace_radius(const ParticleTrace& trace);

struct RadiiTable {
  std::vector<RadiusRecord> records;
  std::int64_t reference_size = 0;
  std::uint64_t untrusted = 0;
};

/// Radii of every top in [0,eps] of every source in `region`, each walk run
/// against the frozen reference aggregate A_T[M_ref].
RadiiTable radii_table(std::uint64_t seed, int dim, const std::vector<Source>& region, double eps, double T,
                       std::int64_t M_ref, std::uint64_t step_budget = kDefaultStepBudget);

/// Same against an explicit frozen reference. Walks whose ball leaves
/// B(trust_center, trust_level) are flagged untrusted.
RadiiTable radii_against(std::uint64_t seed, const Aggregate& reference, const std::string& label,
                         std::int64_t trust_level, const Source& trust_center, const std::vector<Source>& region,
                         double eps, std::uint64_t step_budget = kDefaultStepBudget);

struct BooleanModel {
  int dim = 2;
  std::vector<Source> centers;
  std::vector<std::int64_t> radii;
  std::vector<double> first_time;  // earliest top in [0,eps] of each center
  double epsilon = 0.0;
  double T = 0.0;
};

/// Groups records by source; radius of a center is the max over its records.
BooleanModel build_boolean_model(const std::vector<RadiusRecord>& records, int dim, double eps, double T);

struct Cluster {
  std::vector<std::size_t> members;  // sorted indices into model.centers
};

/// Connected components of the ball-overlap graph, ordered by smallest member.
std::vector<Cluster> clusters(const BooleanModel& model);

/// Smallest r with the cluster of `anchor` inside B(anchor, r); absent when
/// `anchor` is not a center.
std::optional<std::int64_t> origin_cluster_diameter(const BooleanModel& model, const Source& anchor);
std::optional<std::int64_t> origin_cluster_diameter(const BooleanModel& model);

struct ChainRecord {
  Source source;
  double time = 0.0;
  std::int64_t radius = 0;
};

/// Indices of a sequence with strictly decreasing times, consecutive ball
/// overlap, first ball meeting Z_{K0} and last source with level > target.
std::optional<std::vector<std::size_t>> find_descending_chain(const std::vector<ChainRecord>& records,
                                                              std::int64_t K0, std::int64_t target_level);
/// True iff `chain` satisfies every condition above.
bool valid_descending_chain(const std::vector<ChainRecord>& records, const std::vector<std::size_t>& chain,
                            std::int64_t K0, std::int64_t target_level);

/// Records for sources of chi_eps in B(x,10M), radii against A_T[B(x,20M)].
std::vector<RadiusRecord> localized_radii(const Source& x, std::int64_t M, std::uint64_t seed, double eps, double T,
                                          std::uint64_t step_budget = kDefaultStepBudget);

/// Component of B(x,M) in the union of B(x,M) and the model balls escapes B(x,8M).
bool event_G_model(const BooleanModel& model, const Source& x, std::int64_t M);
bool event_G(const Source& x, std::int64_t M, double eps, double T, std::uint64_t seed,
             std::uint64_t step_budget = kDefaultStepBudget);

struct PiEstimate {
  double epsilon = 0.0;
  std::int64_t M = 0;
  stats::Proportion p;
};

/// Frequency of G_eps(0,M) over `trials` replicate seeds derived from `seed`.
PiEstimate estimate_pi(int dim, double eps, std::int64_t M, double T, std::uint64_t trials, std::uint64_t seed,
                       unsigned threads = 1, std::uint64_t step_budget = kDefaultStepBudget);

struct UnionBoundReport {
  double bound = 0.0;
  double slack = 0.0;
  bool pass = false;
};

/// (1 - e^{-eps}) * (20M+1)^{d-1}.
double union_bound(int dim, double eps, std::int64_t M);
UnionBoundReport check_union_bound(int dim, double eps, std::int64_t M, const stats::Proportion& pi_hat);

/// |S_10| * |S_80| for hyperplane spheres of H in dimension d.
double multiscale_constant(int dim);

enum class Verdict { pass, fail, inconclusive };
const char* verdict_name(Verdict v) noexcept;

struct MultiscaleReport {
  double rhs_lo = 0.0;  // c * lo(M)^2 + slack
  double rhs_hi = 0.0;  // c * hi(M)^2 + slack
  Verdict verdict = Verdict::inconclusive;
};

/// Three-valued check of pi(10M) <= c * pi(M)^2 + slack using interval bounds.
MultiscaleReport check_multiscale(const stats::Proportion& at_M, const stats::Proportion& at_10M, double c_geom,
                                  double slack);

}  // namespace idla
