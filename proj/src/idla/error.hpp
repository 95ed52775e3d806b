#pragma once

#include <stdexcept>
#include <string>

namespace idla {

enum class ErrorCode {
  invalid_argument = 1,
  config,
  overflow,
  step_budget_exceeded,
  audit_violation,
  io,
  schema_version_mismatch,
  checksum_mismatch,
  unsupported_dimension,
  snapshot_mismatch,
};

/// Checked error raised by the core library. The C API maps `code()` onto
/// `idla_status`.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

const char* error_code_name(ErrorCode code) noexcept;

}  // namespace idla
