#pragma once

#include <string>
#include <vector>

#include "idla/config.hpp"

namespace idla {

struct CommandOutput {
  std::string message;  // one-line human summary
  std::string stdout_text;  // JSONL when no output path was given
};

/// Runs one subcommand. File outputs go to cfg.out (a path for snapshots and
/// figures, a prefix for .jsonl/.csv pairs).
CommandOutput run_command(const std::string& name, const Config& cfg);

const std::vector<std::string>& command_names();

}  // namespace idla
