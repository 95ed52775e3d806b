#include "idla/coupling.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace idla {

namespace {

/// A particle's walk that can be continued across nested aggregates.
struct LiveWalk {
  WalkCursor cursor;
  Source anchor;
  Site pos;
  Site prev;
  bool has_prev = false;
  std::uint64_t steps = 0;
  std::int64_t radius = 0;

  LiveWalk(WalkCursor c, const Source& a, const Site& start)
      : cursor(std::move(c)), anchor(a), pos(start), radius(hyperplane_distance(start, a.site())) {}

  /// Walks until the current position is outside `agg`.
  void run_until_exit(const Aggregate& agg, std::uint64_t budget) {
    while (agg.contains(pos)) {
      if (steps >= budget) {
        throw Error(ErrorCode::step_budget_exceeded,
                    "particle from " + anchor.site().to_string() + " exceeded the step budget of " +
                        std::to_string(budget));
      }
      prev = pos;
      has_prev = true;
      pos = pos.stepped(cursor.next());
      ++steps;
      radius = std::max(radius, hyperplane_distance(pos, anchor.site()));
    }
  }

  std::int32_t parent_in(const Aggregate& agg) const { return has_prev ? agg.find(prev) : -1; }
};

void check_windows(const std::vector<std::int64_t>& windows) {
  if (windows.empty()) throw Error(ErrorCode::invalid_argument, "ladder needs at least one window");
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (windows[i] < 0) throw Error(ErrorCode::invalid_argument, "window radius must be non-negative");
    if (i && windows[i] <= windows[i - 1]) {
      throw Error(ErrorCode::invalid_argument, "ladder windows must be strictly increasing");
    }
  }
}

double schedule_horizon(const std::vector<Emission>& schedule) {
  return schedule.empty() ? 0.0 : schedule.back().time;
}

}  // namespace

CouplingLadder run_natural_ladder(const std::vector<Emission>& schedule, const WalkProvider& walks, int dim,
                                  const std::vector<std::int64_t>& windows, const LadderOptions& opts) {
  check_windows(windows);
  CouplingLadder ladder;
  ladder.windows = windows;
  ladder.master_seed = walks.master();
  const double horizon = schedule_horizon(schedule);
  for (auto M : windows) ladder.states.emplace_back(dim, DenseBox::for_strip(SourceBox::window(dim, M), horizon));
  if (opts.keep_log) ladder.log.reserve(schedule.size());

  const std::size_t k = windows.size();
  for (const auto& e : schedule) {
    const std::int64_t level = ConeTable::hyperplane_level(e.source.site());
    CouplingEvent ev;
    ev.emission = e;
    ev.per_window.resize(k);
    std::optional<LiveWalk> walk;
    for (std::size_t i = 0; i < k; ++i) {
      if (level > windows[i]) continue;
      if (!walk) walk.emplace(walks.cursor(e.source, e.particle_index), e.source, e.source.site());
      auto& agg = ladder.states[i];
      walk->run_until_exit(agg, opts.step_budget);
      const std::int32_t parent = walk->parent_in(agg);
      agg.insert(walk->pos, e, parent);
      auto& out = ev.per_window[i];
      out.participates = true;
      out.settle = walk->pos;
      if (parent >= 0) out.parent_site = walk->prev;
      out.steps = walk->steps;
      out.radius = walk->radius;
    }
    if (level > windows.back()) {
      throw Error(ErrorCode::invalid_argument, "emission source outside the largest ladder window");
    }

    for (std::size_t i = 0; i + 1 < k; ++i) {
      ++ladder.inclusion_checks;
      bool ok = true;
      if (opts.audit == AuditLevel::full) {
        for (const auto& p : ladder.states[i].order()) {
          if (!ladder.states[i + 1].contains(p.site)) {
            ok = false;
            break;
          }
        }
      } else if (ev.per_window[i].participates) {
        ok = ladder.states[i + 1].contains(ev.per_window[i].settle);
      }
      if (!ok) ++ladder.inclusion_failures;
    }
    if (opts.keep_log) ladder.log.push_back(std::move(ev));
  }
  return ladder;
}

CouplingLadder run_natural_ladder(std::uint64_t seed, int dim, const std::vector<std::int64_t>& windows, double n,
                                  const LadderOptions& opts) {
  check_windows(windows);
  return run_natural_ladder(schedule_emissions(seed, dim, windows.back(), n), WalkProvider(seed), dim, windows,
                            opts);
}

CouplingLadder run_natural_coupling(std::uint64_t seed, int dim, std::int64_t M, std::int64_t M_prime, double n,
                                    const LadderOptions& opts) {
  if (!(M < M_prime)) throw Error(ErrorCode::invalid_argument, "natural coupling needs M < M'");
  return run_natural_ladder(seed, dim, {M, M_prime}, n, opts);
}

SpecialCoupling run_special_coupling(const std::vector<Emission>& schedule, const WalkProvider& walks, int dim,
                                     std::int64_t M, std::int64_t M_prime, std::uint64_t step_budget) {
  if (!(M < M_prime)) throw Error(ErrorCode::invalid_argument, "special coupling needs M < M'");
  const double horizon = schedule_horizon(schedule);
  SpecialCoupling sc{M, M_prime, Aggregate(dim, DenseBox::for_strip(SourceBox::window(dim, M), horizon)),
                     Aggregate(dim, DenseBox::for_strip(SourceBox::window(dim, M_prime), horizon)), {}, {}, 0};
  auto audit_fail = [](const std::string& what) { throw Error(ErrorCode::audit_violation, what); };

  for (const auto& e : schedule) {
    const std::int64_t level = ConeTable::hyperplane_level(e.source.site());
    if (level > M_prime) audit_fail("emission source outside H_M'");
    SpecialEvent ev;
    ev.emission = e;
    LiveWalk walk(walks.cursor(e.source, e.particle_index), e.source, e.source.site());

    if (level > M) {
      walk.run_until_exit(sc.large, step_budget);
      sc.large.insert(walk.pos, e, walk.parent_in(sc.large));
      sc.suspended[walk.pos] = {e, walk.cursor.index()};
      ev.kind = SpecialCase::outer;
      ev.large_site = walk.pos;
    } else {
      walk.run_until_exit(sc.small, step_budget);
      const Site x = walk.pos;
      const std::int32_t small_parent = walk.parent_in(sc.small);
      sc.small.insert(x, e, small_parent);
      ev.small_site = x;
      if (!sc.large.contains(x)) {
        sc.large.insert(x, e, walk.parent_in(sc.large));
        ev.kind = SpecialCase::fresh;
        ev.large_site = x;
      } else {
        auto it = sc.suspended.find(x);
        if (it == sc.suspended.end()) {
          audit_fail("discrepancy " + x.to_string() + " has no suspended creator");
        }
        const SuspendedWalk creator = it->second;
        sc.suspended.erase(it);
        LiveWalk resumed(walks.cursor(creator.origin.source, creator.origin.particle_index, creator.resume_index),
                         creator.origin.source, x);
        resumed.run_until_exit(sc.large, step_budget);
        sc.large.insert(resumed.pos, creator.origin, resumed.parent_in(sc.large));
        sc.suspended[resumed.pos] = {creator.origin, resumed.cursor.index()};
        ev.kind = SpecialCase::wake_up;
        ev.large_site = resumed.pos;
        ev.woken = creator.origin;
      }
    }

    // Audit: inclusion, and every discrepancy owned by an outer-annulus particle.
    ++sc.audits;
    if (ev.kind != SpecialCase::outer && !sc.large.contains(ev.small_site)) {
      audit_fail("inclusion violated at " + ev.small_site.to_string());
    }
    if (sc.large.size() - sc.small.size() != sc.suspended.size()) {
      audit_fail("discrepancy ledger out of sync with aggregate sizes");
    }
    for (const Site* s : {&ev.large_site}) {
      if (sc.small.contains(*s)) continue;
      auto it = sc.suspended.find(*s);
      if (it == sc.suspended.end() ||
          ConeTable::hyperplane_level(it->second.origin.source.site()) <= M) {
        audit_fail("discrepancy " + s->to_string() + " not produced by a particle from H_M' \\ H_M");
      }
    }
    sc.log.push_back(std::move(ev));
  }
  return sc;
}

SpecialCoupling run_special_coupling(std::uint64_t seed, int dim, std::int64_t M, std::int64_t M_prime, double n,
                                     std::uint64_t step_budget) {
  return run_special_coupling(schedule_emissions(seed, dim, M_prime, n), WalkProvider(seed), dim, M, M_prime,
                              step_budget);
}

DiscrepancyReport classify_discrepancies(const Aggregate& small, const Aggregate& large) {
  DiscrepancyReport rep;
  for (const auto& p : large.order()) {
    const std::int32_t si = small.find(p.site);
    if (si < 0) {
      rep.red.push_back(p.site);
      continue;
    }
    const Placement& q = small.at(static_cast<std::size_t>(si));
    const bool diff_emission = !(q.emission == p.emission);
    std::optional<Site> small_parent, large_parent;
    if (q.parent >= 0) small_parent = small.at(static_cast<std::size_t>(q.parent)).site;
    if (p.parent >= 0) large_parent = large.at(static_cast<std::size_t>(p.parent)).site;
    const bool diff_edge = small_parent != large_parent;
    if (diff_emission) rep.blue_by_emission.push_back(p.site);
    if (diff_edge) rep.blue_by_edge.push_back(p.site);
    if (diff_emission || diff_edge) rep.blue.push_back(p.site);
    if (!diff_edge && large_parent) rep.green_edges.push_back({*large_parent, p.site});
  }
  for (const auto& q : small.order()) {
    if (!large.contains(q.site)) {
      throw Error(ErrorCode::invalid_argument, "classify_discrepancies requires inclusion of the smaller aggregate");
    }
  }
  std::sort(rep.red.begin(), rep.red.end());
  std::sort(rep.blue.begin(), rep.blue.end());
  std::sort(rep.blue_by_emission.begin(), rep.blue_by_emission.end());
  std::sort(rep.blue_by_edge.begin(), rep.blue_by_edge.end());
  std::sort(rep.green_edges.begin(), rep.green_edges.end());
  return rep;
}

bool ChainOfChanges::reaches_strip(std::int64_t K) const {
  for (const auto& r : relays) {
    if (ConeTable::hyperplane_level(r.emission.source.site()) <= K + r.radius) return true;
  }
  return false;
}

std::vector<ChainOfChanges> extract_chains(const CouplingLadder& ladder, std::size_t small_idx,
                                           std::size_t large_idx) {
  if (small_idx >= large_idx || large_idx >= ladder.windows.size()) {
    throw Error(ErrorCode::invalid_argument, "extract_chains needs small_idx < large_idx within the ladder");
  }
  std::vector<ChainOfChanges> chains;
  std::unordered_map<Site, std::size_t> token;  // live discrepancy -> chain
  for (const auto& ev : ladder.log) {
    const auto& s = ev.per_window[small_idx];
    const auto& l = ev.per_window[large_idx];
    if (!l.participates) continue;
    if (!s.participates) {
      ChainOfChanges c;
      c.originating_level = ConeTable::hyperplane_level(ev.emission.source.site());
      c.relays.push_back({ev.emission, std::nullopt, l.settle, l.radius});
      token[l.settle] = chains.size();
      chains.push_back(std::move(c));
      continue;
    }
    auto it = token.find(s.settle);
    if (it == token.end()) continue;
    const std::size_t id = it->second;
    token.erase(it);
    chains[id].relays.push_back({ev.emission, s.settle, l.settle, l.radius});
    token[l.settle] = id;
  }
  return chains;
}

bool forest_window_equal(const Forest& a, const Forest& b, std::int64_t K) {
  auto window_vertices = [K](const Forest& f) {
    std::vector<Site> v;
    for (const auto& s : f.vertices)
      if (in_strip(s, K)) v.push_back(s);
    std::sort(v.begin(), v.end());
    return v;
  };
  auto window_edges = [K](const Forest& f) {
    std::vector<Edge> e;
    for (const auto& [child, par] : f.parent)
      if (in_strip(child, K) && in_strip(par, K)) e.push_back({par, child});
    std::sort(e.begin(), e.end());
    return e;
  };
  return window_vertices(a) == window_vertices(b) && window_edges(a) == window_edges(b);
}

}  // namespace idla
