#include "idla/engine.hpp"

#include <algorithm>

namespace idla {

bool emission_before(const Emission& a, const Emission& b) noexcept {
  if (a.time != b.time) return a.time < b.time;
  if (a.source != b.source) return a.source < b.source;
  return a.particle_index < b.particle_index;
}

Aggregate::Aggregate(int dim) : index_(dim) {}
Aggregate::Aggregate(int dim, const DenseBox& box) : index_(dim, box) {}

std::int32_t Aggregate::insert(const Site& site, const Emission& emission, std::int32_t parent) {
  const auto idx = static_cast<std::int32_t>(order_.size());
  if (!index_.insert(site, idx)) {
    throw Error(ErrorCode::audit_violation, "site " + site.to_string() + " inserted twice");
  }
  order_.push_back({site, emission, parent});
  return idx;
}

std::vector<Site> Aggregate::sorted_sites() const {
  std::vector<Site> out;
  out.reserve(order_.size());
  for (const auto& p : order_) out.push_back(p.site);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Edge> Forest::sorted_edges() const {
  std::vector<Edge> out;
  out.reserve(parent.size());
  for (const auto& [child, par] : parent) out.push_back({par, child});
  std::sort(out.begin(), out.end());
  return out;
}

Forest forest_of(const Aggregate& agg) {
  Forest f;
  f.vertices.reserve(agg.size());
  for (const auto& p : agg.order()) {
    f.vertices.push_back(p.site);
    if (p.parent < 0) {
      f.roots.push_back(p.site);
    } else {
      f.parent.emplace(p.site, agg.at(static_cast<std::size_t>(p.parent)).site);
    }
  }
  return f;
}

ParticleTrace advance_particle(WalkCursor& walk, const Site& start, const Source& anchor, const Aggregate& agg,
                               std::uint64_t step_budget, bool record_path) {
  ParticleTrace tr;
  Site pos = start;
  if (record_path) tr.path.push_back(pos);
  tr.radius = hyperplane_distance(pos, anchor.site());
  tr.max_level = ConeTable::hyperplane_level(pos);
  std::int32_t here = agg.find(pos);
  std::int32_t prev = -1;
  Site prev_site;
  std::uint64_t steps = 0;
  while (here >= 0) {
    if (steps >= step_budget) {
      throw Error(ErrorCode::step_budget_exceeded,
                  "particle from " + anchor.site().to_string() + " exceeded the step budget of " +
                      std::to_string(step_budget));
    }
    prev = here;
    prev_site = pos;
    pos = pos.stepped(walk.next());
    ++steps;
    if (record_path) tr.path.push_back(pos);
    tr.radius = std::max(tr.radius, hyperplane_distance(pos, anchor.site()));
    tr.max_level = std::max(tr.max_level, ConeTable::hyperplane_level(pos));
    here = agg.find(pos);
  }
  tr.settle_site = pos;
  tr.steps_taken = steps;
  tr.parent = prev;
  if (prev >= 0) tr.entry_edge = Edge{prev_site, pos};
  return tr;
}

ParticleTrace advance_particle(WalkCursor& walk, const Source& start, const Aggregate& agg,
                               std::uint64_t step_budget, bool record_path) {
  return advance_particle(walk, start.site(), start, agg, step_budget, record_path);
}

std::vector<Emission> schedule_emissions(std::uint64_t seed, const SourceBox& window, double n) {
  if (window.radius < 0) throw Error(ErrorCode::invalid_argument, "window radius must be non-negative");
  if (!(n >= 0.0)) throw Error(ErrorCode::invalid_argument, "horizon must be non-negative");
  std::vector<Emission> out;
  for (const auto& z : window.enumerate()) {
    const auto tops = clock_tops(derive_key(seed, StreamTag::clock, z, 0), n);
    for (std::size_t j = 0; j < tops.size(); ++j) {
      out.push_back({z, tops[j], static_cast<std::uint32_t>(j + 1)});
    }
  }
  std::sort(out.begin(), out.end(), emission_before);
  return out;
}

std::vector<Emission> schedule_emissions(std::uint64_t seed, int dim, std::int64_t M, double n) {
  return schedule_emissions(seed, SourceBox::window(dim, M), n);
}

GrowthResult replay(const std::vector<Emission>& schedule, const WalkProvider& walks, Aggregate initial,
                    const GrowthOptions& opts) {
  GrowthResult res{std::move(initial), {}};
  if (opts.keep_traces) res.traces.reserve(schedule.size());
  for (const auto& e : schedule) {
    WalkCursor cur = walks.cursor(e.source, e.particle_index);
    ParticleTrace tr = advance_particle(cur, e.source.site(), e.source, res.aggregate, opts.step_budget,
                                        opts.record_paths);
    tr.emission = e;
    res.aggregate.insert(tr.settle_site, e, tr.parent);
    if (opts.keep_traces) res.traces.push_back(std::move(tr));
  }
  return res;
}

GrowthResult build_aggregate_forest(std::uint64_t seed, const SourceBox& window, double n,
                                    const GrowthOptions& opts) {
  const int dim = window.center.dim();
  Aggregate agg(dim, DenseBox::for_strip(window, n));
  return replay(schedule_emissions(seed, window, n), WalkProvider(seed), std::move(agg), opts);
}

GrowthResult build_aggregate_forest(std::uint64_t seed, int dim, std::int64_t M, double n,
                                    const GrowthOptions& opts) {
  return build_aggregate_forest(seed, SourceBox::window(dim, M), n, opts);
}

GrowthResult build_ordered_aggregate(std::uint64_t seed, int dim, std::int64_t M, double n,
                                     const GrowthOptions& opts, StepTransform transform) {
  const SourceBox window = SourceBox::window(dim, M);
  std::vector<Emission> order;
  for (const auto& z : window.enumerate_by_level()) {
    const auto tops = clock_tops(derive_key(seed, StreamTag::clock, z, 0), n);
    for (std::size_t j = 0; j < tops.size(); ++j) {
      order.push_back({z, tops[j], static_cast<std::uint32_t>(j + 1)});
    }
  }
  Aggregate agg(dim, DenseBox::for_strip(window, n));
  return replay(order, WalkProvider(seed, transform), std::move(agg), opts);
}

Aggregate single_source_aggregate(std::uint64_t seed, int dim, std::uint64_t count, std::uint64_t step_budget) {
  const Source origin = Source::origin(dim);
  std::vector<Emission> order;
  order.reserve(count);
  for (std::uint64_t j = 1; j <= count; ++j) {
    order.push_back({origin, static_cast<double>(j), static_cast<std::uint32_t>(j)});
  }
  GrowthOptions opts;
  opts.step_budget = step_budget;
  Aggregate agg(dim, DenseBox::for_ball(dim, count));
  return replay(order, WalkProvider(seed), std::move(agg), opts).aggregate;
}

}  // namespace idla
