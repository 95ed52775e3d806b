#include "idla/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "idla/coupling.hpp"
#include "idla/parallel.hpp"
#include "idla/percolation.hpp"
#include "idla/snapshot.hpp"
#include "idla/stats.hpp"

namespace idla {

using nlohmann::ordered_json;

namespace {

ordered_json ci_json(const stats::Interval& ci) { return ordered_json::array({ci.lo, ci.hi}); }

ordered_json site_json(const Site& s) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < s.dim(); ++i) a.push_back(s[i]);
  return a;
}

std::vector<std::uint64_t> replicate_seeds(const Config& cfg) {
  std::vector<std::uint64_t> out(cfg.seeds);
  for (std::uint64_t r = 0; r < cfg.seeds; ++r) out[r] = replicate_seed(cfg.seed, r);
  return out;
}

/// f[i+1] >= f[i] - (half width i + half width i+1) for all i.
bool non_decreasing_within_ci(const std::vector<stats::Proportion>& ps) {
  for (std::size_t i = 0; i + 1 < ps.size(); ++i) {
    if (ps[i + 1].value < ps[i].value - ps[i].ci.half_width() - ps[i + 1].ci.half_width()) return false;
  }
  return true;
}
bool non_increasing_within_ci(const std::vector<stats::Proportion>& ps) {
  for (std::size_t i = 0; i + 1 < ps.size(); ++i) {
    if (ps[i + 1].value > ps[i].value + ps[i].ci.half_width() + ps[i + 1].ci.half_width()) return false;
  }
  return true;
}
bool non_decreasing_strict(const std::vector<stats::Proportion>& ps) {
  for (std::size_t i = 0; i + 1 < ps.size(); ++i)
    if (ps[i + 1].value < ps[i].value) return false;
  return true;
}

std::vector<std::int64_t> grid_or(const std::vector<std::int64_t>& grid, std::int64_t fallback) {
  return grid.empty() ? std::vector<std::int64_t>{fallback} : grid;
}

bool sites_equal_in_strip(const Aggregate& a, const Aggregate& b, std::int64_t K) {
  std::vector<Site> sa, sb;
  for (const auto& p : a.order())
    if (in_strip(p.site, K)) sa.push_back(p.site);
  for (const auto& p : b.order())
    if (in_strip(p.site, K)) sb.push_back(p.site);
  if (sa.size() != sb.size()) return false;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  return sa == sb;
}

GrowthOptions growth_options(const Config& cfg) {
  GrowthOptions o;
  o.step_budget = cfg.step_budget;
  return o;
}

Source source_at_level(int dim, std::int64_t level) {
  Site s(dim);
  s[1] = static_cast<Coord>(level);
  return Source(s);
}

}  // namespace

RunRecord::RunRecord(std::string name, const Config& cfg) : experiment(std::move(name)), config(cfg.echo()) {}

ordered_json RunRecord::envelope(const std::string& kind, ordered_json body) const {
  ordered_json j;
  j["schema_version"] = kRecordSchemaVersion;
  j["experiment"] = experiment;
  j["record"] = kind;
  j["config"] = config;
  for (auto& [k, v] : body.items()) j[k] = std::move(v);
  return j;
}

std::string RunRecord::jsonl() const {
  std::string out;
  for (const auto& l : lines) out += envelope("replicate", l).dump() + '\n';
  out += envelope("summary", summary).dump() + '\n';
  return out;
}

std::string RunRecord::csv() const {
  std::string out;
  for (std::size_t i = 0; i < csv_header.size(); ++i) out += (i ? "," : "") + csv_header[i];
  out += '\n';
  for (const auto& row : csv_rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i].is_string() ? row[i].get<std::string>() : row[i].dump();
    }
    out += '\n';
  }
  return out;
}

void RunRecord::write(const std::string& prefix) const {
  write_text_file(prefix + ".jsonl", jsonl());
  write_text_file(prefix + ".csv", csv());
}

// ---------------------------------------------------------------------------

RunRecord stabilization_scan_forest(const Config& cfg) {
  RunRecord rec("stabilize-forest", cfg);
  const auto grid = grid_or(cfg.grid, cfg.M);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < cfg.K) throw Error(ErrorCode::config, "grid values must be >= K");
    if (i && grid[i] <= grid[i - 1]) throw Error(ErrorCode::config, "grid must be strictly increasing");
  }
  const auto seeds = replicate_seeds(cfg);
  const std::size_t pairs = grid.size() > 1 ? grid.size() - 1 : 1;

  struct Rep {
    std::vector<char> equal, witnessed;
    std::int64_t stable_from = 0;
    std::vector<std::size_t> sizes;
  };
  std::vector<Rep> reps(seeds.size());
  parallel_for(seeds.size(), cfg.threads, [&](std::size_t r) {
    Rep& out = reps[r];
    if (grid.size() == 1) {
      out.equal = {1};
      out.witnessed = {1};
      out.stable_from = grid[0];
      return;
    }
    LadderOptions lo;
    lo.step_budget = cfg.step_budget;
    const auto ladder = run_natural_ladder(seeds[r], cfg.dim, grid, cfg.n, lo);
    std::vector<Forest> forests;
    for (const auto& s : ladder.states) {
      forests.push_back(forest_of(s));
      out.sizes.push_back(s.size());
    }
    for (std::size_t p = 0; p + 1 < grid.size(); ++p) {
      const bool eq = forest_window_equal(forests[p], forests[p + 1], cfg.K);
      bool wit = true;
      if (!eq) {
        wit = false;
        for (const auto& ch : extract_chains(ladder, p, p + 1)) {
          if (ch.reaches_strip(cfg.K)) {
            wit = true;
            break;
          }
        }
      }
      out.equal.push_back(eq ? 1 : 0);
      out.witnessed.push_back(wit ? 1 : 0);
    }
    std::size_t g = grid.size() - 1;
    while (g > 0 && out.equal[g - 1]) --g;
    out.stable_from = grid[g];
  });

  std::vector<std::uint64_t> stable(pairs, 0);
  std::uint64_t unwitnessed = 0;
  std::map<std::int64_t, std::uint64_t> hist;
  for (std::size_t r = 0; r < reps.size(); ++r) {
    const Rep& x = reps[r];
    for (std::size_t p = 0; p < pairs; ++p) {
      stable[p] += static_cast<std::uint64_t>(x.equal[p]);
      if (!x.equal[p] && !x.witnessed[p]) ++unwitnessed;
    }
    ++hist[x.stable_from];
    ordered_json l;
    l["replicate"] = r;
    l["seed"] = seeds[r];
    l["window_equal"] = x.equal;
    l["chain_witnessed"] = x.witnessed;
    l["smallest_stable_N"] = x.stable_from;
    l["aggregate_sizes"] = x.sizes;
    rec.lines.push_back(std::move(l));
  }
  std::vector<stats::Proportion> fr;
  ordered_json pair_json = ordered_json::array();
  rec.csv_header = {"N", "N_prime", "seeds", "stable", "fraction", "ci_lo", "ci_hi"};
  for (std::size_t p = 0; p < pairs; ++p) {
    const auto prop = stats::proportion(stable[p], seeds.size());
    fr.push_back(prop);
    const std::int64_t N = grid[p], Np = grid.size() > 1 ? grid[p + 1] : grid[p];
    pair_json.push_back({{"N", N}, {"N_prime", Np}, {"stable_fraction", prop.value}, {"ci", ci_json(prop.ci)}});
    rec.csv_rows.push_back({N, Np, seeds.size(), stable[p], prop.value, prop.ci.lo, prop.ci.hi});
  }
  ordered_json h = ordered_json::array();
  for (const auto& [N, c] : hist) h.push_back({{"N", N}, {"seeds", c}});
  rec.summary["pairs"] = pair_json;
  rec.summary["non_decreasing"] = non_decreasing_strict(fr);
  rec.summary["non_decreasing_within_ci"] = non_decreasing_within_ci(fr);
  rec.summary["top_pair_fraction"] = fr.back().value;
  rec.summary["unwitnessed_instabilities"] = unwitnessed;
  rec.summary["smallest_stable_N"] = h;
  return rec;
}

RunRecord stabilization_scan_aggregate(const Config& cfg) {
  RunRecord rec("stabilize-aggregate", cfg);
  const auto Ms = grid_or(cfg.M_grid, cfg.M);
  for (auto M : Ms)
    if (M < 1) throw Error(ErrorCode::config, "aggregate stabilization needs M >= 1");
  const auto seeds = replicate_seeds(cfg);
  std::vector<char> agree(Ms.size() * seeds.size(), 0);
  parallel_for(agree.size(), cfg.threads, [&](std::size_t idx) {
    const std::int64_t M = Ms[idx / seeds.size()];
    const std::uint64_t s = seeds[idx % seeds.size()];
    LadderOptions lo;
    lo.step_budget = cfg.step_budget;
    lo.keep_log = false;
    const auto ladder = run_natural_ladder(s, cfg.dim, {2 * M, 4 * M}, cfg.n, lo);
    agree[idx] = sites_equal_in_strip(ladder.states[0], ladder.states[1], M) ? 1 : 0;
  });
  rec.csv_header = {"M", "seeds", "agree", "fraction", "ci_lo", "ci_hi"};
  std::vector<stats::Proportion> fr;
  ordered_json per_M = ordered_json::array();
  for (std::size_t m = 0; m < Ms.size(); ++m) {
    std::uint64_t a = 0;
    for (std::size_t r = 0; r < seeds.size(); ++r) {
      const bool ok = agree[m * seeds.size() + r];
      a += ok;
      rec.lines.push_back({{"M", Ms[m]}, {"replicate", r}, {"seed", seeds[r]}, {"agree", ok}});
    }
    const auto prop = stats::proportion(a, seeds.size());
    fr.push_back(prop);
    per_M.push_back({{"M", Ms[m]}, {"agreement", prop.value}, {"ci", ci_json(prop.ci)}});
    rec.csv_rows.push_back({Ms[m], seeds.size(), a, prop.value, prop.ci.lo, prop.ci.hi});
  }
  rec.summary["per_M"] = per_M;
  rec.summary["non_decreasing_within_ci"] = non_decreasing_within_ci(fr);
  return rec;
}

RunRecord cone_scan(const Config& cfg) {
  RunRecord rec("cone-scan", cfg);
  const ConeSpec spec(cfg.cone_eps, cfg.alpha);
  // alpha must exceed 1 - 1/d.
  if (!(static_cast<double>(spec.alpha.num) * cfg.dim > static_cast<double>(spec.alpha.den) * (cfg.dim - 1))) {
    throw Error(ErrorCode::config, "cone scan needs alpha in (1 - 1/d, 1)");
  }
  const auto Ms = grid_or(cfg.M_grid, cfg.M);
  const auto seeds = replicate_seeds(cfg);
  std::vector<char> violated(Ms.size() * seeds.size(), 0);
  std::vector<std::size_t> sizes(violated.size(), 0);
  parallel_for(violated.size(), cfg.threads, [&](std::size_t idx) {
    const std::int64_t M = Ms[idx / seeds.size()];
    ConeTable cone(spec);
    const auto res = build_aggregate_forest(seeds[idx % seeds.size()], cfg.dim, 2 * M, cfg.n, growth_options(cfg));
    sizes[idx] = res.aggregate.size();
    for (const auto& p : res.aggregate.order()) {
      if (!in_strip(p.site, M) && !cone.contains(p.site)) {
        violated[idx] = 1;
        break;
      }
    }
  });
  rec.csv_header = {"M", "seeds", "violations", "frequency", "ci_lo", "ci_hi"};
  std::vector<stats::Proportion> fr;
  ordered_json per_M = ordered_json::array();
  for (std::size_t m = 0; m < Ms.size(); ++m) {
    std::uint64_t v = 0;
    for (std::size_t r = 0; r < seeds.size(); ++r) {
      const std::size_t idx = m * seeds.size() + r;
      v += violated[idx];
      rec.lines.push_back({{"M", Ms[m]},
                           {"replicate", r},
                           {"seed", seeds[r]},
                           {"aggregate_size", sizes[idx]},
                           {"cone_violation", static_cast<bool>(violated[idx])}});
    }
    const auto prop = stats::proportion(v, seeds.size());
    fr.push_back(prop);
    per_M.push_back({{"M", Ms[m]}, {"violation_frequency", prop.value}, {"ci", ci_json(prop.ci)}});
    rec.csv_rows.push_back({Ms[m], seeds.size(), v, prop.value, prop.ci.lo, prop.ci.hi});
  }
  rec.summary["per_M"] = per_M;
  rec.summary["proxy_window"] = "2M";
  rec.summary["non_increasing_within_ci"] = non_increasing_within_ci(fr);
  return rec;
}

std::vector<std::int64_t> donut_levels(std::int64_t start_level, std::int64_t M, const ConeSpec& spec) {
  ConeTable cone(spec);
  std::vector<std::int64_t> out{start_level};
  for (;;) {
    const std::int64_t l = out.back();
    const std::int64_t next = l - (2 * cone.max_first_coord(l) + 1);
    if (next <= M) break;
    out.push_back(next);
  }
  return out;
}

RunRecord strip_entry_scan(const Config& cfg) {
  RunRecord rec("strip-scan", cfg);
  const ConeSpec spec(cfg.cone_eps, cfg.alpha);
  const std::int64_t M = cfg.M;
  const std::vector<std::int64_t> levels =
      cfg.levels.empty() ? std::vector<std::int64_t>{2 * M + 1, 4 * M, 8 * M} : cfg.levels;
  if (cfg.walks < 1 || cfg.walks > kMaxParticleIndex) throw Error(ErrorCode::config, "walks must be in [1, 2^20]");
  const double c = 1.0 / static_cast<double>(4 * cfg.dim * cfg.dim);
  const double p0 = 1.0 - c;

  rec.csv_header = {"level", "donut", "outer", "inner", "entered", "crossed", "frequency", "bound", "sigma", "pass"};
  std::vector<stats::Proportion> reach;
  bool all_pass = true;
  std::uint64_t donut_count = 0, empty_donuts = 0;
  double max_freq = 0.0;
  ordered_json per_level = ordered_json::array();
  for (auto L : levels) {
    if (L <= M) throw Error(ErrorCode::config, "strip scan levels must exceed M");
    const auto bounds = donut_levels(L, M, spec);
    const Source start = source_at_level(cfg.dim, L);
    std::vector<std::uint32_t> deepest(cfg.walks, 0);  // boundaries reached
    std::vector<char> reached(cfg.walks, 0);
    parallel_for(cfg.walks, cfg.threads, [&](std::size_t w) {
      ConeTable cone(spec);
      const StreamKey key = derive_key(cfg.seed, StreamTag::walk, start, static_cast<std::uint32_t>(w + 1));
      WalkCursor cur(key, cfg.dim, 0, StepTransform::none);
      Site pos = start.site();
      std::uint32_t next_bound = 1;
      std::uint64_t steps = 0;
      for (;;) {
        const std::int64_t lvl = ConeTable::hyperplane_level(pos);
        while (next_bound < bounds.size() && lvl <= bounds[next_bound]) ++next_bound;
        if (lvl <= M) {
          reached[w] = 1;
          break;
        }
        if (!cone.contains(pos)) break;
        if (steps++ >= cfg.step_budget) {
          throw Error(ErrorCode::step_budget_exceeded, "strip walk exceeded the step budget");
        }
        pos = pos.stepped(cur.next());
      }
      deepest[w] = next_bound;
    });
    std::uint64_t hits = 0;
    for (auto x : reached) hits += static_cast<std::uint64_t>(x);
    const auto prop = stats::proportion(hits, cfg.walks);
    reach.push_back(prop);
    ordered_json donuts = ordered_json::array();
    for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
      std::uint64_t entered = 0, crossed = 0;
      for (auto dpt : deepest) {
        entered += dpt >= k + 1;
        crossed += dpt >= k + 2;
      }
      ++donut_count;
      double freq = 0.0, sigma = 0.0;
      bool pass = true;
      if (entered == 0) {
        ++empty_donuts;
      } else {
        freq = static_cast<double>(crossed) / static_cast<double>(entered);
        sigma = std::sqrt(p0 * (1.0 - p0) / static_cast<double>(entered));
        pass = freq <= p0 + 3.0 * sigma;
        max_freq = std::max(max_freq, freq);
      }
      all_pass = all_pass && pass;
      donuts.push_back({{"outer", bounds[k]},
                        {"inner", bounds[k + 1]},
                        {"entered", entered},
                        {"crossed", crossed},
                        {"frequency", freq},
                        {"sigma", sigma},
                        {"pass", pass}});
      rec.csv_rows.push_back({L, k, bounds[k], bounds[k + 1], entered, crossed, freq, p0, sigma, pass});
    }
    ordered_json l{{"level", L},       {"walks", cfg.walks}, {"reached", hits},
                   {"reach_fraction", prop.value}, {"ci", ci_json(prop.ci)}, {"donuts", donuts}};
    per_level.push_back({{"level", L}, {"reach_fraction", prop.value}, {"donuts", bounds.size() - 1}});
    rec.lines.push_back(std::move(l));
  }
  rec.summary["per_level"] = per_level;
  rec.summary["crossing_bound"] = p0;
  rec.summary["donuts"] = donut_count;
  rec.summary["donuts_without_walks"] = empty_donuts;
  rec.summary["max_crossing_frequency"] = max_freq;
  rec.summary["all_donuts_within_bound"] = all_pass;
  rec.summary["reach_non_increasing_within_ci"] = non_increasing_within_ci(reach);
  return rec;
}

RunRecord translation_test(const Config& cfg) {
  RunRecord rec("translate-test", cfg);
  if (cfg.shifts.empty()) throw Error(ErrorCode::config, "translate-test needs at least one shift");
  std::vector<Source> shifts;
  std::int64_t far = 0;
  for (const auto& s : cfg.shifts) {
    shifts.push_back(Source(Site::from_span(s.data(), cfg.dim)));
    far = std::max(far, ConeTable::hyperplane_level(shifts.back().site()));
  }
  const std::int64_t K = cfg.K;
  const std::int64_t W = 2 * (far + K);
  const auto seeds = replicate_seeds(cfg);
  const std::size_t windows = shifts.size() + 1;
  std::vector<std::int64_t> counts(seeds.size() * windows, 0);

  const SourceBox cube_h{Source::origin(cfg.dim), K};
  const auto cube_sources = cube_h.enumerate();
  parallel_for(seeds.size(), cfg.threads, [&](std::size_t r) {
    const auto res = build_aggregate_forest(seeds[r], cfg.dim, W, cfg.n, growth_options(cfg));
    for (std::size_t w = 0; w < windows; ++w) {
      const Source k = w == 0 ? Source::origin(cfg.dim) : shifts[w - 1];
      std::int64_t c = 0;
      for (const auto& h : cube_sources) {
        for (std::int64_t x0 = -K; x0 <= K; ++x0) {
          Site s = translate(h.site(), k);
          s[0] = static_cast<Coord>(x0);
          c += res.aggregate.contains(s);
        }
      }
      counts[r * windows + w] = c;
    }
  });

  std::int64_t max_count = 0;
  for (auto c : counts) max_count = std::max(max_count, c);
  std::vector<std::vector<double>> table(windows, std::vector<double>(static_cast<std::size_t>(max_count) + 1, 0.0));
  std::vector<std::vector<double>> series(windows, std::vector<double>(seeds.size(), 0.0));
  for (std::size_t r = 0; r < seeds.size(); ++r) {
    ordered_json cs = ordered_json::array();
    for (std::size_t w = 0; w < windows; ++w) {
      const auto c = counts[r * windows + w];
      table[w][static_cast<std::size_t>(c)] += 1.0;
      series[w][r] = static_cast<double>(c);
      cs.push_back(c);
    }
    rec.lines.push_back({{"replicate", r}, {"seed", seeds[r]}, {"window_counts", cs}});
  }
  const auto homog = stats::homogeneity(table);
  rec.csv_header = {"shift", "shift_norm", "mean_count", "correlation", "corr_ci_lo", "corr_ci_hi", "pair_p_value"};
  ordered_json per_shift = ordered_json::array();
  std::vector<std::pair<std::int64_t, stats::Correlation>> corr;
  for (std::size_t w = 1; w < windows; ++w) {
    const auto pc = stats::homogeneity({table[0], table[w]});
    const auto cr = stats::pearson(series[0], series[w]);
    const std::int64_t norm = ConeTable::hyperplane_level(shifts[w - 1].site());
    corr.emplace_back(norm, cr);
    per_shift.push_back({{"shift", site_json(shifts[w - 1].site())},
                         {"mean_count", stats::mean(series[w])},
                         {"pair_p_value", pc.p_value},
                         {"correlation", cr.r},
                         {"correlation_ci", ci_json(cr.ci)}});
    rec.csv_rows.push_back({shifts[w - 1].site().to_string(), norm, stats::mean(series[w]), cr.r, cr.ci.lo, cr.ci.hi,
                            pc.p_value});
  }
  // Mixing proxy: correlation at the farthest shift must not exceed the
  // nearest one beyond interval slack.
  bool decay_ok = true;
  if (corr.size() >= 2) {
    auto near = *std::min_element(corr.begin(), corr.end(), [](auto& a, auto& b) { return a.first < b.first; });
    auto farc = *std::max_element(corr.begin(), corr.end(), [](auto& a, auto& b) { return a.first < b.first; });
    decay_ok = farc.second.r <= near.second.r + near.second.ci.half_width() + farc.second.ci.half_width();
  }
  rec.summary["proxy_window"] = W;
  rec.summary["origin_mean_count"] = stats::mean(series[0]);
  rec.summary["homogeneity_statistic"] = homog.statistic;
  rec.summary["homogeneity_df"] = homog.df;
  rec.summary["homogeneity_p_value"] = homog.p_value;
  rec.summary["homogeneous"] = homog.p_value >= cfg.significance;
  rec.summary["per_shift"] = per_shift;
  rec.summary["correlation_decay_ok"] = decay_ok;
  return rec;
}

RunRecord rooted_and_vacant_scan(const Config& cfg) {
  RunRecord rec("rooted-scan", cfg);
  const auto seeds = replicate_seeds(cfg);
  const SourceBox region = SourceBox::window(cfg.dim, cfg.region);
  const auto sources = region.enumerate();
  const bool vacant = cfg.dim == 2;
  std::vector<std::uint64_t> rooted(seeds.size(), 0);
  std::vector<std::int64_t> vacant_lines(seeds.size(), -1);
  parallel_for(seeds.size(), cfg.threads, [&](std::size_t r) {
    for (const auto& z : sources) {
      if (cfg.n > 0.0 && !clock_tops(derive_key(seeds[r], StreamTag::clock, z, 0), cfg.n).empty()) ++rooted[r];
    }
    if (!vacant) return;
    const std::int64_t h = cfg.height;
    const auto res = build_aggregate_forest(seeds[r], cfg.dim, 2 * h, cfg.n, growth_options(cfg));
    std::set<std::int64_t> occupied_lines;
    for (const auto& p : res.aggregate.order()) occupied_lines.insert(p.site[1]);
    std::int64_t v = 0;
    for (std::int64_t y = -h; y <= h; ++y) v += occupied_lines.count(y) == 0;
    vacant_lines[r] = v;
  });
  std::uint64_t total_rooted = 0, with_vacant = 0;
  for (std::size_t r = 0; r < seeds.size(); ++r) {
    total_rooted += rooted[r];
    with_vacant += vacant_lines[r] > 0;
    ordered_json l{{"replicate", r},
                   {"seed", seeds[r]},
                   {"sources", sources.size()},
                   {"rooted", rooted[r]},
                   {"density", static_cast<double>(rooted[r]) / static_cast<double>(sources.size())}};
    if (vacant) l["vacant_lines"] = vacant_lines[r];
    rec.lines.push_back(std::move(l));
  }
  const auto dens = stats::proportion(total_rooted, sources.size() * seeds.size());
  const double expected = -std::expm1(-cfg.n);
  rec.summary["rooted_density"] = dens.value;
  rec.summary["rooted_ci"] = ci_json(dens.ci);
  rec.summary["expected_density"] = expected;
  rec.summary["density_consistent"] = dens.ci.lo <= expected && expected <= dens.ci.hi;
  rec.csv_header = {"n", "sources", "rooted_density", "ci_lo", "ci_hi", "expected", "vacant_fraction"};
  ordered_json vf = nullptr;
  if (vacant) {
    const auto p = stats::proportion(with_vacant, seeds.size());
    rec.summary["vacant_fraction"] = p.value;
    rec.summary["vacant_ci"] = ci_json(p.ci);
    vf = p.value;
  }
  rec.csv_rows.push_back({cfg.n, sources.size() * seeds.size(), dens.value, dens.ci.lo, dens.ci.hi, expected,
                          vacant ? vf : ordered_json("")});
  return rec;
}

RunRecord abelian_scan(const Config& cfg, bool negative_control) {
  RunRecord rec(negative_control ? "abelian-control" : "abelian", cfg);
  const std::uint64_t R = cfg.seeds;
  std::vector<std::vector<Site>> time_arm(R), level_arm(R);
  const StepTransform tf = negative_control ? StepTransform::one_sided_first_axis : StepTransform::none;
  parallel_for(2 * R, cfg.threads, [&](std::size_t i) {
    if (i < R) {
      time_arm[i] =
          build_aggregate_forest(replicate_seed(cfg.seed, i), cfg.dim, cfg.M, cfg.n, growth_options(cfg))
              .aggregate.sorted_sites();
    } else {
      const std::size_t r = i - R;
      level_arm[r] = build_ordered_aggregate(replicate_seed(cfg.seed, R + r), cfg.dim, cfg.M, cfg.n,
                                             growth_options(cfg), tf)
                         .aggregate.sorted_sites();
    }
  });
  std::map<Site, std::pair<std::uint64_t, std::uint64_t>> freq;
  for (const auto& v : time_arm)
    for (const auto& s : v) ++freq[s].first;
  for (const auto& v : level_arm)
    for (const auto& s : v) ++freq[s].second;

  struct Row {
    Site site;
    std::uint64_t a, b;
    stats::ChiSquareResult test;
  };
  std::vector<Row> tested;
  for (const auto& [s, ab] : freq) {
    const double pooled = static_cast<double>(ab.first + ab.second) / static_cast<double>(2 * R);
    const double e_in = pooled * static_cast<double>(R), e_out = (1.0 - pooled) * static_cast<double>(R);
    const bool enough = std::min(e_in, e_out) >= 5.0;
    ordered_json l{{"site", site_json(s)}, {"count_time_ordered", ab.first}, {"count_level_ordered", ab.second},
                   {"tested", enough}};
    if (enough) {
      const auto t = stats::two_proportions(ab.first, R, ab.second, R);
      tested.push_back({s, ab.first, ab.second, t});
      l["statistic"] = t.statistic;
      l["p_value"] = t.p_value;
    }
    rec.lines.push_back(std::move(l));
  }
  double max_stat = 0.0, min_p = 1.0;
  for (const auto& t : tested) {
    max_stat = std::max(max_stat, t.test.statistic);
    min_p = std::min(min_p, t.test.p_value);
  }
  const double adjusted = tested.empty() ? 1.0 : std::min(1.0, min_p * static_cast<double>(tested.size()));
  rec.summary["negative_control"] = negative_control;
  rec.summary["sites_tested"] = tested.size();
  rec.summary["max_statistic"] = max_stat;
  rec.summary["min_p_value"] = min_p;
  rec.summary["adjusted_p_value"] = adjusted;
  rec.summary["pass"] = adjusted >= cfg.significance;
  rec.csv_header = {"site", "count_time_ordered", "count_level_ordered", "statistic", "p_value"};
  for (const auto& t : tested) rec.csv_rows.push_back({t.site.to_string(), t.a, t.b, t.test.statistic, t.test.p_value});
  return rec;
}

RunRecord coverage_scan(const Config& cfg) {
  RunRecord rec("coverage", cfg);
  std::vector<Site> S;
  for (const auto& s : cfg.sites) S.push_back(Site::from_span(s.data(), cfg.dim));
  if (cfg.coverage_radius >= 0) {
    const std::int64_t r = cfg.coverage_radius;
    for (const auto& h : SourceBox::window(cfg.dim, r).enumerate()) {
      for (std::int64_t x0 = -r; x0 <= r; ++x0) {
        Site s = h.site();
        s[0] = static_cast<Coord>(x0);
        S.push_back(s);
      }
    }
  }
  std::sort(S.begin(), S.end());
  S.erase(std::unique(S.begin(), S.end()), S.end());
  std::int64_t reach = 0;
  for (const auto& s : S) reach = std::max(reach, ConeTable::hyperplane_level(s));
  const std::int64_t W = std::max<std::int64_t>(2 * reach, 2);
  std::vector<double> ns = cfg.n_grid.empty() ? std::vector<double>{cfg.n} : cfg.n_grid;
  const auto seeds = replicate_seeds(cfg);
  std::vector<char> covered(ns.size() * seeds.size(), 1);
  if (!S.empty()) {
    parallel_for(covered.size(), cfg.threads, [&](std::size_t idx) {
      const auto res =
          build_aggregate_forest(seeds[idx % seeds.size()], cfg.dim, W, ns[idx / seeds.size()], growth_options(cfg));
      for (const auto& s : S) {
        if (!res.aggregate.contains(s)) {
          covered[idx] = 0;
          break;
        }
      }
    });
  }
  rec.csv_header = {"n", "seeds", "covered", "fraction", "ci_lo", "ci_hi"};
  std::vector<stats::Proportion> fr;
  ordered_json per_n = ordered_json::array();
  for (std::size_t k = 0; k < ns.size(); ++k) {
    std::uint64_t c = 0;
    for (std::size_t r = 0; r < seeds.size(); ++r) {
      const bool ok = covered[k * seeds.size() + r];
      c += ok;
      rec.lines.push_back({{"n", ns[k]}, {"replicate", r}, {"seed", seeds[r]}, {"covered", ok}});
    }
    const auto prop = stats::proportion(c, seeds.size());
    fr.push_back(prop);
    per_n.push_back({{"n", ns[k]}, {"fraction", prop.value}, {"ci", ci_json(prop.ci)}});
    rec.csv_rows.push_back({ns[k], seeds.size(), c, prop.value, prop.ci.lo, prop.ci.hi});
  }
  rec.summary["set_size"] = S.size();
  rec.summary["proxy_window"] = W;
  rec.summary["per_n"] = per_n;
  rec.summary["non_decreasing"] = non_decreasing_strict(fr);
  return rec;
}

RunRecord radius_tail_scan(const Config& cfg) {
  RunRecord rec("radius-tail", cfg);
  const auto thresholds = cfg.M_grid.empty() ? std::vector<std::int64_t>{4, 8, 16} : cfg.M_grid;
  const auto region = SourceBox::window(cfg.dim, cfg.region).enumerate();
  const std::uint64_t target = cfg.records;
  std::vector<RadiusRecord> all;
  std::uint64_t seeds_used = 0, untrusted = 0;
  const std::size_t batch = std::max<std::size_t>(1, cfg.threads) * 4;
  for (std::uint64_t r0 = 0;; r0 += batch) {
    const std::uint64_t limit = target ? r0 + batch : std::min<std::uint64_t>(r0 + batch, cfg.seeds);
    if (!target && r0 >= cfg.seeds) break;
    std::vector<RadiiTable> tables(limit - r0);
    parallel_for(tables.size(), cfg.threads, [&](std::size_t i) {
      tables[i] = radii_table(replicate_seed(cfg.seed, r0 + i), cfg.dim, region, cfg.eps, cfg.T, cfg.M_ref,
                              cfg.step_budget);
    });
    bool done = false;
    for (auto& t : tables) {
      ++seeds_used;
      for (auto& x : t.records) {
        if (target && all.size() >= target) break;
        untrusted += !x.trusted;
        all.push_back(std::move(x));
      }
      if (target && all.size() >= target) {
        done = true;
        break;
      }
    }
    if (done) break;
    if (target && r0 > (std::uint64_t{1} << 32)) throw Error(ErrorCode::config, "radius tail never reached target");
  }
  for (const auto& x : all) {
    rec.lines.push_back({{"source", site_json(x.start.source.site())},
                         {"time", x.start.time},
                         {"particle_index", x.start.particle_index},
                         {"radius", x.radius},
                         {"steps", x.steps},
                         {"trusted", x.trusted},
                         {"reference", x.reference}});
  }
  rec.csv_header = {"M", "records", "at_least_M", "tail", "ci_lo", "ci_hi"};
  std::vector<stats::Proportion> tail;
  ordered_json tj = ordered_json::array();
  for (auto M : thresholds) {
    std::uint64_t c = 0;
    for (const auto& x : all) c += x.radius >= M;
    const auto p = stats::proportion(c, all.size());
    tail.push_back(p);
    tj.push_back({{"M", M}, {"tail", p.value}, {"ci", ci_json(p.ci)}});
    rec.csv_rows.push_back({M, all.size(), c, p.value, p.ci.lo, p.ci.hi});
  }
  bool strictly = true;
  for (std::size_t i = 0; i + 1 < tail.size(); ++i) strictly = strictly && tail[i + 1].value < tail[i].value;
  rec.summary["records"] = all.size();
  rec.summary["seeds_used"] = seeds_used;
  rec.summary["untrusted_walks"] = untrusted;
  rec.summary["tail"] = tj;
  rec.summary["strictly_decreasing"] = strictly;
  rec.summary["last_below_quarter_of_first"] = tail.size() >= 2 && tail.back().value < tail.front().value / 4.0;
  return rec;
}

RunRecord pi_scan(const Config& cfg) {
  RunRecord rec("pi-scan", cfg);
  const std::vector<double> eps = cfg.eps_grid.empty() ? std::vector<double>{cfg.eps} : cfg.eps_grid;
  const auto Ms = grid_or(cfg.M_grid, cfg.M);
  rec.csv_header = {"epsilon", "M", "trials", "pi_hat", "ci_lo", "ci_hi", "bound"};
  bool all_pass = true;
  std::map<std::pair<double, std::int64_t>, stats::Proportion> est;
  for (double e : eps) {
    for (auto M : Ms) {
      const auto pi = estimate_pi(cfg.dim, e, M, cfg.T, cfg.trials, cfg.seed, cfg.threads, cfg.step_budget);
      const auto ub = check_union_bound(cfg.dim, e, M, pi.p);
      all_pass = all_pass && ub.pass;
      est[{e, M}] = pi.p;
      rec.lines.push_back({{"epsilon", e},
                           {"M", M},
                           {"trials", cfg.trials},
                           {"hits", pi.p.successes},
                           {"pi_hat", pi.p.value},
                           {"ci", ci_json(pi.p.ci)},
                           {"bound", ub.bound},
                           {"slack", ub.slack},
                           {"union_bound_pass", ub.pass}});
      rec.csv_rows.push_back({e, M, cfg.trials, pi.p.value, pi.p.ci.lo, pi.p.ci.hi, ub.bound});
    }
  }
  ordered_json ms = ordered_json::array();
  const double c = multiscale_constant(cfg.dim);
  for (const auto& [key, p] : est) {
    auto it = est.find({key.first, key.second * 10});
    if (it == est.end()) continue;
    const auto rep = check_multiscale(p, it->second, c, cfg.slack);
    ms.push_back({{"epsilon", key.first},
                  {"M", key.second},
                  {"c_geom", c},
                  {"rhs_lo", rep.rhs_lo},
                  {"rhs_hi", rep.rhs_hi},
                  {"verdict", verdict_name(rep.verdict)}});
  }
  rec.summary["union_bound_all_pass"] = all_pass;
  rec.summary["c_geom"] = c;
  rec.summary["multiscale"] = ms;
  return rec;
}

}  // namespace idla
