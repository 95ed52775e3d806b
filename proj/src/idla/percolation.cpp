#include "idla/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "idla/parallel.hpp"

namespace idla {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::uint8_t> rank_;
};

std::int64_t source_distance(const Source& a, const Source& b) { return hyperplane_distance(a.site(), b.site()); }

std::string ball_label(const Source& x, std::int64_t r) { return "ball:" + x.site().to_string() + ":" + std::to_string(r); }

}  // namespace

std::int64_t trace_radius(const ParticleTrace& trace) {
  if (trace.path.empty()) return trace.radius;
  const Site& z = trace.emission.source.site();
  std::int64_t r = 0;
  for (const auto& s : trace.path) r = std::max(r, hyperplane_distance(s, z));
  return r;
}

RadiiTable radii_against(std::uint64_t seed, const Aggregate& reference, const std::string& label,
                         std::int64_t trust_level, const Source& trust_center, const std::vector<Source>& region,
                         double eps, std::uint64_t step_budget) {
  RadiiTable table;
  table.reference_size = static_cast<std::int64_t>(reference.size());
  if (!(eps >= 0.0)) throw Error(ErrorCode::invalid_argument, "epsilon must be non-negative");
  const WalkProvider walks(seed);
  for (const auto& z : region) {
    const auto tops = clock_tops(derive_key(seed, StreamTag::clock, z, 0), eps);
    for (std::size_t j = 0; j < tops.size(); ++j) {
      const auto idx = static_cast<std::uint32_t>(j + 1);
      WalkCursor cur = walks.cursor(z, idx);
      const ParticleTrace tr = advance_particle(cur, z.site(), z, reference, step_budget, false);
      RadiusRecord rec;
      rec.start = {z, tops[j], idx};
      rec.radius = tr.radius;
      rec.reference = label;
      rec.steps = tr.steps_taken;
      rec.max_level = tr.max_level;
      rec.trusted = source_distance(z, trust_center) + tr.radius <= trust_level;
      if (!rec.trusted) ++table.untrusted;
      table.records.push_back(std::move(rec));
    }
  }
  return table;
}

RadiiTable radii_table(std::uint64_t seed, int dim, const std::vector<Source>& region, double eps, double T,
                       std::int64_t M_ref, std::uint64_t step_budget) {
  if (eps > T) throw Error(ErrorCode::invalid_argument, "radii need eps <= T");
  if (M_ref < 0) throw Error(ErrorCode::invalid_argument, "reference window must be non-negative");
  GrowthOptions opts;
  opts.step_budget = step_budget;
  const auto ref = build_aggregate_forest(seed, dim, M_ref, T, opts);
  return radii_against(seed, ref.aggregate, "window:" + std::to_string(M_ref), M_ref / 2, Source::origin(dim),
                       region, eps, step_budget);
}

BooleanModel build_boolean_model(const std::vector<RadiusRecord>& records, int dim, double eps, double T) {
  BooleanModel model;
  model.dim = dim;
  model.epsilon = eps;
  model.T = T;
  std::map<Source, std::size_t> slot;
  for (const auto& r : records) {
    if (r.start.time > eps) continue;
    auto [it, fresh] = slot.emplace(r.start.source, model.centers.size());
    if (fresh) {
      model.centers.push_back(r.start.source);
      model.radii.push_back(r.radius);
      model.first_time.push_back(r.start.time);
    } else {
      model.radii[it->second] = std::max(model.radii[it->second], r.radius);
      model.first_time[it->second] = std::min(model.first_time[it->second], r.start.time);
    }
  }
  return model;
}

std::vector<Cluster> clusters(const BooleanModel& model) {
  const std::size_t n = model.centers.size();
  DisjointSets ds(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (hball_overlap(model.centers[a], model.radii[a], model.centers[b], model.radii[b])) ds.unite(a, b);
  std::map<std::size_t, std::size_t> by_root;
  std::vector<Cluster> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, fresh] = by_root.emplace(ds.find(i), out.size());
    if (fresh) out.emplace_back();
    out[it->second].members.push_back(i);
  }
  return out;
}

std::optional<std::int64_t> origin_cluster_diameter(const BooleanModel& model, const Source& anchor) {
  const auto pos = std::find(model.centers.begin(), model.centers.end(), anchor);
  if (pos == model.centers.end()) return std::nullopt;
  const auto anchor_idx = static_cast<std::size_t>(pos - model.centers.begin());
  for (const auto& c : clusters(model)) {
    if (!std::binary_search(c.members.begin(), c.members.end(), anchor_idx)) continue;
    std::int64_t r = 0;
    for (auto i : c.members) r = std::max(r, source_distance(model.centers[i], anchor) + model.radii[i]);
    return r;
  }
  return std::nullopt;
}

std::optional<std::int64_t> origin_cluster_diameter(const BooleanModel& model) {
  return origin_cluster_diameter(model, Source::origin(model.dim));
}

namespace {

bool chain_start(const ChainRecord& r, std::int64_t K0) {
  return ConeTable::hyperplane_level(r.source.site()) <= K0 + r.radius;
}
bool chain_goal(const ChainRecord& r, std::int64_t target) {
  return ConeTable::hyperplane_level(r.source.site()) > target;
}
bool chain_link(const ChainRecord& a, const ChainRecord& b) {
  return b.time < a.time && hball_overlap(a.source, a.radius, b.source, b.radius);
}

}  // namespace

bool valid_descending_chain(const std::vector<ChainRecord>& records, const std::vector<std::size_t>& chain,
                            std::int64_t K0, std::int64_t target_level) {
  if (chain.empty()) return false;
  for (auto i : chain)
    if (i >= records.size()) return false;
  if (!chain_start(records[chain.front()], K0)) return false;
  if (!chain_goal(records[chain.back()], target_level)) return false;
  for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
    if (!chain_link(records[chain[k]], records[chain[k + 1]])) return false;
  }
  return true;
}

std::optional<std::vector<std::size_t>> find_descending_chain(const std::vector<ChainRecord>& records,
                                                              std::int64_t K0, std::int64_t target_level) {
  const std::size_t n = records.size();
  if (n == 0) return std::nullopt;
  // Links always go to strictly earlier times, so processing by increasing
  // time settles every successor before its predecessors.
  std::vector<std::size_t> by_time(n);
  std::iota(by_time.begin(), by_time.end(), 0);
  std::stable_sort(by_time.begin(), by_time.end(),
                   [&](std::size_t a, std::size_t b) { return records[a].time < records[b].time; });
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<char> reach(n, 0);
  std::vector<std::size_t> next(n, kNone);
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t i = by_time[pos];
    if (chain_goal(records[i], target_level)) {
      reach[i] = 1;
      continue;
    }
    for (std::size_t q = 0; q < pos; ++q) {
      const std::size_t k = by_time[q];
      if (reach[k] && chain_link(records[i], records[k])) {
        reach[i] = 1;
        next[i] = k;
        break;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!reach[i] || !chain_start(records[i], K0)) continue;
    std::vector<std::size_t> chain;
    for (std::size_t c = i; c != kNone; c = next[c]) chain.push_back(c);
    return chain;
  }
  return std::nullopt;
}

std::vector<RadiusRecord> localized_radii(const Source& x, std::int64_t M, std::uint64_t seed, double eps, double T,
                                          std::uint64_t step_budget) {
  if (M < 1) throw Error(ErrorCode::invalid_argument, "localized radii need M >= 1");
  if (eps > T) throw Error(ErrorCode::invalid_argument, "radii need eps <= T");
  const SourceBox inner{x, 10 * M};
  std::vector<Source> emitting;
  for (const auto& z : inner.enumerate()) {
    if (!clock_tops(derive_key(seed, StreamTag::clock, z, 0), eps).empty()) emitting.push_back(z);
  }
  if (emitting.empty()) return {};
  GrowthOptions opts;
  opts.step_budget = step_budget;
  const SourceBox outer{x, 20 * M};
  const auto ref = build_aggregate_forest(seed, outer, T, opts);
  return radii_against(seed, ref.aggregate, ball_label(x, 20 * M), 20 * M, x, emitting, eps, step_budget).records;
}

bool event_G_model(const BooleanModel& model, const Source& x, std::int64_t M) {
  const std::size_t n = model.centers.size();
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> frontier;
  for (std::size_t i = 0; i < n; ++i) {
    if (hball_overlap(x, M, model.centers[i], model.radii[i])) {
      seen[i] = 1;
      frontier.push_back(i);
    }
  }
  while (!frontier.empty()) {
    const std::size_t a = frontier.back();
    frontier.pop_back();
    if (source_distance(model.centers[a], x) + model.radii[a] > 8 * M) return true;
    for (std::size_t b = 0; b < n; ++b) {
      if (!seen[b] && hball_overlap(model.centers[a], model.radii[a], model.centers[b], model.radii[b])) {
        seen[b] = 1;
        frontier.push_back(b);
      }
    }
  }
  return false;
}

bool event_G(const Source& x, std::int64_t M, double eps, double T, std::uint64_t seed, std::uint64_t step_budget) {
  const auto recs = localized_radii(x, M, seed, eps, T, step_budget);
  if (recs.empty()) return false;
  return event_G_model(build_boolean_model(recs, x.dim(), eps, T), x, M);
}

PiEstimate estimate_pi(int dim, double eps, std::int64_t M, double T, std::uint64_t trials, std::uint64_t seed,
                       unsigned threads, std::uint64_t step_budget) {
  if (trials < 1) throw Error(ErrorCode::invalid_argument, "pi estimate needs at least one trial");
  std::vector<char> hit(trials, 0);
  const Source origin = Source::origin(dim);
  parallel_for(trials, threads, [&](std::size_t i) {
    hit[i] = event_G(origin, M, eps, T, replicate_seed(seed, i), step_budget) ? 1 : 0;
  });
  const auto hits = static_cast<std::uint64_t>(std::count(hit.begin(), hit.end(), 1));
  return {eps, M, stats::proportion(hits, trials)};
}

double union_bound(int dim, double eps, std::int64_t M) {
  check_dimension(dim);
  const double side = static_cast<double>(20 * M + 1);
  return -std::expm1(-eps) * std::pow(side, dim - 1);
}

UnionBoundReport check_union_bound(int dim, double eps, std::int64_t M, const stats::Proportion& pi_hat) {
  UnionBoundReport rep;
  rep.bound = union_bound(dim, eps, M);
  rep.slack = 2.0 * pi_hat.ci.half_width();
  rep.pass = pi_hat.value <= rep.bound + rep.slack;
  return rep;
}

double multiscale_constant(int dim) {
  return static_cast<double>(hyperplane_sphere_size(dim, 10)) * static_cast<double>(hyperplane_sphere_size(dim, 80));
}

const char* verdict_name(Verdict v) noexcept {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

MultiscaleReport check_multiscale(const stats::Proportion& at_M, const stats::Proportion& at_10M, double c_geom,
                                  double slack) {
  MultiscaleReport rep;
  rep.rhs_lo = c_geom * at_M.ci.lo * at_M.ci.lo + slack;
  rep.rhs_hi = c_geom * at_M.ci.hi * at_M.ci.hi + slack;
  if (at_10M.ci.hi <= rep.rhs_lo) rep.verdict = Verdict::pass;
  else if (at_10M.ci.lo > rep.rhs_hi) rep.verdict = Verdict::fail;
  else rep.verdict = Verdict::inconclusive;
  return rep;
}

}  // namespace idla
