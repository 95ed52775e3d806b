#include "idla/commands.hpp"

#include <algorithm>
#include <map>

#include "idla/coupling.hpp"
#include "idla/experiments.hpp"
#include "idla/percolation.hpp"
#include "idla/snapshot.hpp"
#include "idla/svg.hpp"

namespace idla {

using nlohmann::ordered_json;

namespace {

ordered_json site_json(const Site& s) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < s.dim(); ++i) a.push_back(s[i]);
  return a;
}

ordered_json emission_json(const Emission& e) {
  return {{"source", site_json(e.source.site())}, {"time", e.time}, {"particle_index", e.particle_index}};
}

SnapshotHeader header_of(const Config& cfg) {
  SnapshotHeader h;
  h.dim = cfg.dim;
  h.M = cfg.M;
  h.n = cfg.n;
  h.seed = cfg.seed;
  h.mode = parse_build_mode(cfg.mode);
  h.step_budget = cfg.step_budget;
  return h;
}

CommandOutput emit(const RunRecord& rec, const Config& cfg, std::string message) {
  CommandOutput out;
  if (cfg.out.empty()) out.stdout_text = rec.jsonl();
  else rec.write(cfg.out);
  out.message = std::move(message);
  return out;
}

std::string summary_message(const RunRecord& rec) { return rec.experiment + ": " + rec.summary.dump(); }

void need_out(const Config& cfg, const std::string& cmd) {
  if (cfg.out.empty()) throw Error(ErrorCode::config, cmd + " needs --out");
}

CommandOutput cmd_simulate(const Config& cfg) {
  need_out(cfg, "simulate");
  const Snapshot snap = simulate(header_of(cfg));
  save_snapshot(snap, cfg.out);
  return {"simulate: " + std::to_string(snap.size()) + " sites written to " + cfg.out, ""};
}

CommandOutput cmd_forest(const Config& cfg) {
  const Snapshot snap = cfg.input.empty() ? simulate(header_of(cfg)) : load_snapshot(cfg.input);
  RunRecord rec("forest", cfg);
  std::size_t roots = 0;
  std::vector<std::size_t> depth(snap.size(), 0);
  std::size_t max_depth = 0;
  for (std::size_t i = 0; i < snap.size(); ++i) {
    const auto p = snap.parents[i];
    if (p < 0) ++roots;
    else depth[i] = depth[static_cast<std::size_t>(p)] + 1;
    max_depth = std::max(max_depth, depth[i]);
    ordered_json l{{"insertion", i},
                   {"site", site_json(snap.sites[i])},
                   {"parent", p < 0 ? ordered_json(nullptr) : site_json(snap.sites[static_cast<std::size_t>(p)])},
                   {"emission", emission_json(snap.emissions[i])},
                   {"steps", snap.digests[i].steps},
                   {"radius", snap.digests[i].radius}};
    rec.lines.push_back(std::move(l));
  }
  rec.summary = {{"sites", snap.size()}, {"roots", roots}, {"edges", snap.size() - roots}, {"max_depth", max_depth}};
  rec.csv_header = {"sites", "roots", "edges", "max_depth"};
  rec.csv_rows.push_back({snap.size(), roots, snap.size() - roots, max_depth});
  return emit(rec, cfg, summary_message(rec));
}

ordered_json outcome_json(const WindowOutcome& w) {
  if (!w.participates) return nullptr;
  return {{"settle", site_json(w.settle)},
          {"parent", w.parent_site ? site_json(*w.parent_site) : ordered_json(nullptr)},
          {"steps", w.steps},
          {"radius", w.radius}};
}

CommandOutput cmd_couple(const Config& cfg) {
  LadderOptions lo;
  lo.step_budget = cfg.step_budget;
  lo.audit = AuditLevel::full;
  const auto ladder = run_natural_coupling(cfg.seed, cfg.dim, cfg.M, cfg.M_prime, cfg.n, lo);
  const auto special = run_special_coupling(cfg.seed, cfg.dim, cfg.M, cfg.M_prime, cfg.n, cfg.step_budget);
  RunRecord rec("couple", cfg);
  std::uint64_t outer = 0;
  for (const auto& ev : ladder.log) {
    outer += !ev.per_window[0].participates;
    rec.lines.push_back({{"emission", emission_json(ev.emission)},
                         {"small", outcome_json(ev.per_window[0])},
                         {"large", outcome_json(ev.per_window[1])}});
  }
  const auto rep = classify_discrepancies(ladder.states[0], ladder.states[1]);
  const bool small_identical = special.small.sorted_sites() == ladder.states[0].sorted_sites() &&
                               forest_of(special.small).sorted_edges() == forest_of(ladder.states[0]).sorted_edges();
  rec.summary = {{"events", ladder.log.size()},
                 {"outer_emissions", outer},
                 {"red", rep.red.size()},
                 {"blue", rep.blue.size()},
                 {"blue_by_emission", rep.blue_by_emission.size()},
                 {"blue_by_edge", rep.blue_by_edge.size()},
                 {"green_edges", rep.green_edges.size()},
                 {"inclusion_checks", ladder.inclusion_checks},
                 {"inclusion_failures", ladder.inclusion_failures},
                 {"special_audits", special.audits},
                 {"special_small_identical", small_identical}};
  if (!cfg.windows.empty()) {
    // extra ladder over the configured windows, full inclusion audit
    const auto wide = run_natural_ladder(cfg.seed, cfg.dim, cfg.windows, cfg.n, lo);
    ordered_json sizes = ordered_json::array();
    for (const auto& st : wide.states) sizes.push_back(st.size());
    rec.summary["ladder"] = {{"windows", cfg.windows},
                             {"sizes", sizes},
                             {"inclusion_checks", wide.inclusion_checks},
                             {"inclusion_failures", wide.inclusion_failures}};
  }
  rec.csv_header = {"events", "outer_emissions", "red", "blue", "blue_by_emission", "blue_by_edge", "green_edges",
                    "inclusion_failures"};
  rec.csv_rows.push_back({ladder.log.size(), outer, rep.red.size(), rep.blue.size(), rep.blue_by_emission.size(),
                          rep.blue_by_edge.size(), rep.green_edges.size(), ladder.inclusion_failures});
  return emit(rec, cfg, summary_message(rec));
}

CommandOutput cmd_chains(const Config& cfg) {
  LadderOptions lo;
  lo.step_budget = cfg.step_budget;
  const auto ladder = run_natural_coupling(cfg.seed, cfg.dim, cfg.M, cfg.M_prime, cfg.n, lo);
  const auto chains = extract_chains(ladder, 0, 1);
  RunRecord rec("chains", cfg);
  std::size_t longest = 0, reaching = 0;
  for (const auto& ch : chains) {
    ordered_json relays = ordered_json::array();
    for (const auto& r : ch.relays) {
      relays.push_back({{"emission", emission_json(r.emission)},
                        {"visited", r.visited ? site_json(*r.visited) : ordered_json(nullptr)},
                        {"created", site_json(r.created)},
                        {"radius", r.radius}});
    }
    const bool reach = ch.reaches_strip(cfg.K);
    reaching += reach;
    longest = std::max(longest, ch.relays.size());
    rec.lines.push_back({{"originating_level", ch.originating_level},
                         {"length", ch.relays.size()},
                         {"reaches_strip", reach},
                         {"relays", relays}});
  }
  rec.summary = {{"chains", chains.size()}, {"longest", longest}, {"reaching_strip_K", reaching}};
  rec.csv_header = {"chains", "longest", "reaching_strip_K"};
  rec.csv_rows.push_back({chains.size(), longest, reaching});
  return emit(rec, cfg, summary_message(rec));
}

CommandOutput cmd_boolean(const Config& cfg) {
  const auto region = SourceBox::window(cfg.dim, cfg.region).enumerate();
  const auto table = radii_table(cfg.seed, cfg.dim, region, cfg.eps, cfg.T, cfg.M_ref, cfg.step_budget);
  const auto model = build_boolean_model(table.records, cfg.dim, cfg.eps, cfg.T);
  const auto cl = clusters(model);
  RunRecord rec("boolean", cfg);
  std::size_t largest = 0;
  for (const auto& c : cl) {
    ordered_json members = ordered_json::array();
    ordered_json radii = ordered_json::array();
    for (auto i : c.members) {
      members.push_back(site_json(model.centers[i].site()));
      radii.push_back(model.radii[i]);
    }
    largest = std::max(largest, c.members.size());
    rec.lines.push_back({{"size", c.members.size()}, {"centers", members}, {"radii", radii}});
  }
  std::uint64_t degree = 0;
  for (std::size_t a = 0; a < model.centers.size(); ++a)
    for (std::size_t b = a + 1; b < model.centers.size(); ++b)
      degree += 2 * hball_overlap(model.centers[a], model.radii[a], model.centers[b], model.radii[b]);
  std::vector<ChainRecord> cr;
  for (const auto& r : table.records) cr.push_back({r.start.source, r.start.time, r.radius});
  const auto chain = find_descending_chain(cr, cfg.K0, cfg.target_level);
  ordered_json witness = nullptr;
  if (chain) {
    witness = ordered_json::array();
    for (auto i : *chain)
      witness.push_back({{"source", site_json(cr[i].source.site())}, {"time", cr[i].time}, {"radius", cr[i].radius}});
  }
  const auto diam = origin_cluster_diameter(model);
  rec.summary = {{"records", table.records.size()},
                 {"untrusted_walks", table.untrusted},
                 {"centers", model.centers.size()},
                 {"clusters", cl.size()},
                 {"largest_cluster", largest},
                 {"mean_degree", model.centers.empty() ? 0.0
                                                        : static_cast<double>(degree) /
                                                              static_cast<double>(model.centers.size())},
                 {"origin_cluster_diameter", diam ? ordered_json(*diam) : ordered_json(nullptr)},
                 {"descending_chain", witness},
                 {"target_level", cfg.target_level}};
  rec.csv_header = {"centers", "clusters", "largest_cluster", "origin_cluster_diameter", "descending_chain_length"};
  rec.csv_rows.push_back({model.centers.size(), cl.size(), largest, diam ? ordered_json(*diam) : ordered_json(""),
                          chain ? chain->size() : 0});
  return emit(rec, cfg, summary_message(rec));
}

CommandOutput cmd_abelian(const Config& cfg) {
  RunRecord rec = abelian_scan(cfg, false);
  const RunRecord control = abelian_scan(cfg, true);
  rec.summary["control"] = control.summary;
  return emit(rec, cfg, summary_message(rec));
}

CommandOutput cmd_figure(const Config& cfg) {
  need_out(cfg, "figure");
  std::string doc;
  if (cfg.style == "coupling") {
    LadderOptions lo;
    lo.step_budget = cfg.step_budget;
    lo.keep_log = false;
    const auto ladder = run_natural_coupling(cfg.seed, cfg.dim, cfg.M, cfg.M_prime, cfg.n, lo);
    doc = coupling_svg(ladder.states[0], ladder.states[1], classify_discrepancies(ladder.states[0], ladder.states[1]));
  } else {
    const Snapshot snap = cfg.input.empty() ? simulate(header_of(cfg)) : load_snapshot(cfg.input);
    doc = forest_svg(snap);
  }
  write_text_file(cfg.out, doc);
  return {"figure: written to " + cfg.out, ""};
}

CommandOutput cmd_verify(const Config& cfg) {
  if (cfg.input.empty()) throw Error(ErrorCode::config, "verify-snapshot needs a snapshot path");
  const Snapshot snap = load_snapshot(cfg.input);
  const VerifyReport rep = verify_snapshot(snap);
  if (!rep.match) throw Error(ErrorCode::snapshot_mismatch, "snapshot does not match replay: " + rep.detail);
  return {"verify-snapshot: " + std::to_string(snap.size()) + " sites match a fresh replay", ""};
}

template <RunRecord (*F)(const Config&)>
CommandOutput experiment(const Config& cfg) {
  const RunRecord rec = F(cfg);
  return emit(rec, cfg, summary_message(rec));
}

using Handler = CommandOutput (*)(const Config&);

const std::vector<std::pair<std::string, Handler>>& handlers() {
  static const std::vector<std::pair<std::string, Handler>> table = {
      {"simulate", cmd_simulate},
      {"forest", cmd_forest},
      {"couple", cmd_couple},
      {"chains", cmd_chains},
      {"radii", experiment<radius_tail_scan>},
      {"boolean", cmd_boolean},
      {"pi-scan", experiment<pi_scan>},
      {"stabilize-forest", experiment<stabilization_scan_forest>},
      {"stabilize-aggregate", experiment<stabilization_scan_aggregate>},
      {"cone-scan", experiment<cone_scan>},
      {"strip-scan", experiment<strip_entry_scan>},
      {"abelian", cmd_abelian},
      {"translate-test", experiment<translation_test>},
      {"coverage", experiment<coverage_scan>},
      {"rooted-scan", experiment<rooted_and_vacant_scan>},
      {"figure", cmd_figure},
      {"verify-snapshot", cmd_verify},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [n, _] : handlers()) v.push_back(n);
    return v;
  }();
  return names;
}

CommandOutput run_command(const std::string& name, const Config& cfg) {
  cfg.validate();
  for (const auto& [n, h] : handlers()) {
    if (n == name) return h(cfg);
  }
  throw Error(ErrorCode::invalid_argument, "unknown command '" + name + "'");
}

}  // namespace idla
