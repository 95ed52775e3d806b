#ifndef IDLA_IDLA_H
#define IDLA_IDLA_H

/* C interface to the multi-source IDLA forest simulator. All objects are
 * opaque handles; every fallible call returns an idla_status and leaves a
 * message for idla_last_error() on the calling thread. */

#include <stddef.h>
#include <stdint.h>

#if defined(IDLA_BUILDING_LIBRARY)
#define IDLA_API __attribute__((visibility("default")))
#else
#define IDLA_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum idla_status {
  IDLA_OK = 0,
  IDLA_ERR_INVALID_ARGUMENT = 1,
  IDLA_ERR_CONFIG = 2,
  IDLA_ERR_OVERFLOW = 3,
  IDLA_ERR_STEP_BUDGET_EXCEEDED = 4,
  IDLA_ERR_AUDIT_VIOLATION = 5,
  IDLA_ERR_IO = 6,
  IDLA_ERR_SCHEMA_VERSION_MISMATCH = 7,
  IDLA_ERR_CHECKSUM_MISMATCH = 8,
  IDLA_ERR_UNSUPPORTED_DIMENSION = 9,
  IDLA_ERR_SNAPSHOT_MISMATCH = 10,
  IDLA_ERR_INTERNAL = 100
} idla_status;

typedef struct idla_config idla_config;
typedef struct idla_snapshot idla_snapshot;

/* Receives output text; `data` is not NUL-terminated. */
typedef void (*idla_write_fn)(const char* data, size_t len, void* user);

IDLA_API const char* idla_version(void);
IDLA_API const char* idla_status_name(idla_status status);
/* Message of the last failed call on this thread ("" if none). */
IDLA_API const char* idla_last_error(void);

IDLA_API idla_status idla_config_create(idla_config** out);
IDLA_API void idla_config_destroy(idla_config* cfg);
IDLA_API idla_status idla_config_set(idla_config* cfg, const char* key, const char* value);
IDLA_API idla_status idla_config_load_file(idla_config* cfg, const char* path);
IDLA_API idla_status idla_config_validate(const idla_config* cfg);
/* Writes the key = value form of the configuration through `write`. */
IDLA_API idla_status idla_config_dump(const idla_config* cfg, idla_write_fn write, void* user);
IDLA_API size_t idla_config_key_count(void);
IDLA_API const char* idla_config_key_name(size_t index);

IDLA_API size_t idla_command_count(void);
IDLA_API const char* idla_command_name(size_t index);
/* Runs a subcommand. `message` receives a one-line summary, `data` receives
 * JSONL when the configuration has no output path. Either may be NULL. */
IDLA_API idla_status idla_run(const idla_config* cfg, const char* command, idla_write_fn message,
                              idla_write_fn data, void* user);

IDLA_API idla_status idla_simulate(const idla_config* cfg, idla_snapshot** out);
IDLA_API idla_status idla_snapshot_load(const char* path, idla_snapshot** out);
IDLA_API idla_status idla_snapshot_save(const idla_snapshot* snap, const char* path);
IDLA_API void idla_snapshot_destroy(idla_snapshot* snap);
IDLA_API int idla_snapshot_dim(const idla_snapshot* snap);
IDLA_API size_t idla_snapshot_size(const idla_snapshot* snap);
/* coords must hold dim entries; parent is the insertion index of the parent
 * site or -1 for a root. */
IDLA_API idla_status idla_snapshot_site(const idla_snapshot* snap, size_t index, int64_t* coords, int64_t* parent);
/* IDLA_OK when a fresh replay reproduces the snapshot exactly. */
IDLA_API idla_status idla_snapshot_verify(const idla_snapshot* snap);
IDLA_API idla_status idla_snapshot_write_svg(const idla_snapshot* snap, const char* path);

#ifdef __cplusplus
}
#endif

#endif
