#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bbm {

// Stable identifiers; the CLI prints them verbatim and maps them to exit codes.
enum class ErrorCode {
  invalid_argument,
  subdiffusivity_violated,
  fixed_radius_rejected,
  domain_error,
  no_sign_change,
  unsupported_mode,
  budget_exceeded,
  insufficient_data,
  config_error,
  io_error,
};

std::string_view error_code_name(ErrorCode code);
int exit_code(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace bbm
