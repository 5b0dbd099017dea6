#include "bbm/error.hpp"

namespace bbm {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::subdiffusivity_violated: return "subdiffusivity_violated";
    case ErrorCode::fixed_radius_rejected: return "fixed_radius_rejected";
    case ErrorCode::domain_error: return "domain_error";
    case ErrorCode::no_sign_change: return "no_sign_change";
    case ErrorCode::unsupported_mode: return "unsupported_mode";
    case ErrorCode::budget_exceeded: return "budget_exceeded";
    case ErrorCode::insufficient_data: return "insufficient_data";
    case ErrorCode::config_error: return "config_error";
    case ErrorCode::io_error: return "io_error";
  }
  return "unknown";
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return 2;
    case ErrorCode::subdiffusivity_violated: return 3;
    case ErrorCode::fixed_radius_rejected: return 4;
    case ErrorCode::domain_error: return 5;
    case ErrorCode::no_sign_change: return 6;
    case ErrorCode::unsupported_mode: return 7;
    case ErrorCode::budget_exceeded: return 8;
    case ErrorCode::insufficient_data: return 9;
    case ErrorCode::config_error: return 10;
    case ErrorCode::io_error: return 11;
  }
  return 1;
}

}  // namespace bbm
