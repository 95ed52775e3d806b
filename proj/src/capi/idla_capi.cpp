#include "idla/idla.h"

#include <new>
#include <string>

#include "idla/commands.hpp"
#include "idla/config.hpp"
#include "idla/snapshot.hpp"
#include "idla/svg.hpp"

struct idla_config {
  idla::Config cfg;
};

struct idla_snapshot {
  idla::Snapshot snap;
};

namespace {

thread_local std::string last_error;

idla_status to_status(idla::ErrorCode c) { return static_cast<idla_status>(static_cast<int>(c)); }

template <class F>
idla_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return IDLA_OK;
  } catch (const idla::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return IDLA_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return IDLA_ERR_INTERNAL;
  }
}

idla_status null_argument(const char* what) {
  last_error = std::string("null argument: ") + what;
  return IDLA_ERR_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char* idla_version(void) { return "1.0.0"; }

const char* idla_status_name(idla_status status) {
  if (status == IDLA_OK) return "Ok";
  if (status == IDLA_ERR_INTERNAL) return "InternalError";
  const int v = static_cast<int>(status);
  if (v >= 1 && v <= 10) return idla::error_code_name(static_cast<idla::ErrorCode>(v));
  return "UnknownStatus";
}

const char* idla_last_error(void) { return last_error.c_str(); }

idla_status idla_config_create(idla_config** out) {
  if (!out) return null_argument("out");
  return guarded([&] { *out = new idla_config(); });
}

void idla_config_destroy(idla_config* cfg) { delete cfg; }

idla_status idla_config_set(idla_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return null_argument("cfg/key/value");
  return guarded([&] { cfg->cfg.set(key, value); });
}

idla_status idla_config_load_file(idla_config* cfg, const char* path) {
  if (!cfg || !path) return null_argument("cfg/path");
  return guarded([&] { cfg->cfg.load_file(path); });
}

idla_status idla_config_validate(const idla_config* cfg) {
  if (!cfg) return null_argument("cfg");
  return guarded([&] { cfg->cfg.validate(); });
}

idla_status idla_config_dump(const idla_config* cfg, idla_write_fn write, void* user) {
  if (!cfg || !write) return null_argument("cfg/write");
  return guarded([&] {
    const std::string text = cfg->cfg.to_text();
    write(text.data(), text.size(), user);
  });
}

size_t idla_config_key_count(void) { return idla::Config::keys().size(); }

const char* idla_config_key_name(size_t index) {
  const auto& keys = idla::Config::keys();
  return index < keys.size() ? keys[index].c_str() : nullptr;
}

size_t idla_command_count(void) { return idla::command_names().size(); }

const char* idla_command_name(size_t index) {
  const auto& names = idla::command_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

idla_status idla_run(const idla_config* cfg, const char* command, idla_write_fn message, idla_write_fn data,
                     void* user) {
  if (!cfg || !command) return null_argument("cfg/command");
  return guarded([&] {
    const idla::CommandOutput out = idla::run_command(command, cfg->cfg);
    if (data && !out.stdout_text.empty()) data(out.stdout_text.data(), out.stdout_text.size(), user);
    if (message && !out.message.empty()) message(out.message.data(), out.message.size(), user);
  });
}

idla_status idla_simulate(const idla_config* cfg, idla_snapshot** out) {
  if (!cfg || !out) return null_argument("cfg/out");
  return guarded([&] {
    cfg->cfg.validate();
    idla::SnapshotHeader h;
    h.dim = cfg->cfg.dim;
    h.M = cfg->cfg.M;
    h.n = cfg->cfg.n;
    h.seed = cfg->cfg.seed;
    h.mode = idla::parse_build_mode(cfg->cfg.mode);
    h.step_budget = cfg->cfg.step_budget;
    auto* s = new idla_snapshot{idla::simulate(h)};
    *out = s;
  });
}

idla_status idla_snapshot_load(const char* path, idla_snapshot** out) {
  if (!path || !out) return null_argument("path/out");
  return guarded([&] { *out = new idla_snapshot{idla::load_snapshot(path)}; });
}

idla_status idla_snapshot_save(const idla_snapshot* snap, const char* path) {
  if (!snap || !path) return null_argument("snap/path");
  return guarded([&] { idla::save_snapshot(snap->snap, path); });
}

void idla_snapshot_destroy(idla_snapshot* snap) { delete snap; }

int idla_snapshot_dim(const idla_snapshot* snap) { return snap ? snap->snap.header.dim : 0; }

size_t idla_snapshot_size(const idla_snapshot* snap) { return snap ? snap->snap.size() : 0; }

idla_status idla_snapshot_site(const idla_snapshot* snap, size_t index, int64_t* coords, int64_t* parent) {
  if (!snap || !coords) return null_argument("snap/coords");
  if (index >= snap->snap.size()) {
    last_error = "site index out of range";
    return IDLA_ERR_INVALID_ARGUMENT;
  }
  const auto& s = snap->snap.sites[index];
  for (int i = 0; i < s.dim(); ++i) coords[i] = s[i];
  if (parent) *parent = snap->snap.parents[index];
  last_error.clear();
  return IDLA_OK;
}

idla_status idla_snapshot_verify(const idla_snapshot* snap) {
  if (!snap) return null_argument("snap");
  return guarded([&] {
    const auto rep = idla::verify_snapshot(snap->snap);
    if (!rep.match) throw idla::Error(idla::ErrorCode::snapshot_mismatch, "snapshot does not match replay: " + rep.detail);
  });
}

idla_status idla_snapshot_write_svg(const idla_snapshot* snap, const char* path) {
  if (!snap || !path) return null_argument("snap/path");
  return guarded([&] { idla::write_text_file(path, idla::forest_svg(snap->snap)); });
}

}  // extern "C"
