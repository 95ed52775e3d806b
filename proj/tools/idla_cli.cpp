// idla: command-line front end. Everything goes through the C interface.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "idla/idla.h"

namespace {

const std::set<std::string> kArrayKeys = {"grid", "windows", "eps_grid", "M_grid", "levels", "n_grid", "shifts", "sites"};
const std::set<std::string> kStringKeys = {"out", "input", "mode", "style"};

std::string quote(const std::string& s) {
  std::string q = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') q += '\\';
    q += c;
  }
  return q + "\"";
}

std::string to_config_value(const std::string& key, const std::string& raw) {
  if (kStringKeys.count(key)) return quote(raw);
  if (kArrayKeys.count(key) && (raw.empty() || raw.front() != '[')) return "[" + raw + "]";
  return raw;
}

void write_stdout(const char* data, size_t len, void*) { std::fwrite(data, 1, len, stdout); }
void write_stderr_line(const char* data, size_t len, void*) {
  std::fwrite(data, 1, len, stderr);
  std::fputc('\n', stderr);
}

int fail(idla_status st) {
  std::cerr << "error: " << idla_status_name(st) << ": " << idla_last_error() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-source IDLA forests: simulation, couplings and percolation analysis"};
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "Configuration file (key = value)");

  // One option per configuration key; the global flags are among them.
  std::map<std::string, std::string> values;
  const std::map<std::string, std::string> short_names = {{"M", "-M"}, {"n", "-n"}};
  const std::map<std::string, std::string> flag_names = {
      {"seed", "--seed"}, {"dim", "--dim"}, {"out", "--out"}, {"threads", "--threads"}, {"step_budget", "--step-budget"}};
  std::vector<std::string> keys;
  for (size_t i = 0; i < idla_config_key_count(); ++i) keys.emplace_back(idla_config_key_name(i));
  for (const auto& key : keys) {
    std::string names;
    if (auto it = short_names.find(key); it != short_names.end()) names = it->second + ",";
    if (auto it = flag_names.find(key); it != flag_names.end()) {
      names += it->second;
    } else {
      std::string dashed = key;
      for (auto& c : dashed)
        if (c == '_') c = '-';
      names += "--" + dashed;
      if (dashed != key) names += ",--" + key;
    }
    auto* opt = app.add_option(names, values[key], "config key '" + key + "'");
    opt->group(key == "seed" || key == "dim" || key == "out" || key == "threads" || key == "step_budget"
                   ? "Global"
                   : "Parameters");
  }

  std::string positional;
  std::vector<CLI::App*> subs;
  for (size_t i = 0; i < idla_command_count(); ++i) {
    const std::string name = idla_command_name(i);
    auto* sub = app.add_subcommand(name, "Run '" + name + "'");
    sub->fallthrough();
    if (name == "verify-snapshot") sub->add_option("snapshot", positional, "Snapshot file")->required();
    if (name == "figure") sub->add_option("snapshot", positional, "Snapshot file to render");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  idla_config* cfg = nullptr;
  if (idla_status st = idla_config_create(&cfg); st != IDLA_OK) return fail(st);
  struct Guard {
    idla_config* c;
    ~Guard() { idla_config_destroy(c); }
  } guard{cfg};

  if (!config_path.empty()) {
    if (idla_status st = idla_config_load_file(cfg, config_path.c_str()); st != IDLA_OK) return fail(st);
  }
  for (const auto& [key, raw] : values) {
    if (raw.empty()) continue;
    const std::string v = to_config_value(key, raw);
    if (idla_status st = idla_config_set(cfg, key.c_str(), v.c_str()); st != IDLA_OK) {
      std::cerr << "usage error: invalid value for '" << key << "': " << idla_last_error() << "\n";
      return 2;
    }
  }

  std::string command;
  for (auto* sub : subs)
    if (sub->parsed()) command = sub->get_name();
  if (!positional.empty()) {
    if (idla_status st = idla_config_set(cfg, "input", quote(positional).c_str()); st != IDLA_OK) return fail(st);
  }

  const auto t0 = std::chrono::steady_clock::now();
  const idla_status st = idla_run(cfg, command.c_str(), write_stderr_line, write_stdout, nullptr);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (st != IDLA_OK) return fail(st);
  std::fprintf(stderr, "wall-clock: %.3f s\n", secs);
  return 0;
}
