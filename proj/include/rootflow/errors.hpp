#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rootflow {

/// Machine-readable failure categories; `code_name` gives the token written
/// into reports and CLI error output.
enum class ErrorCode {
  domain,
  singularity,
  invalid_transform,
  unsupported,
  insufficient_data,
  config,
  degree_drop,
  nonconvergence,
  step_rejected,
  io,
};

constexpr std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::domain: return "domain";
    case ErrorCode::singularity: return "singularity";
    case ErrorCode::invalid_transform: return "invalid_transform";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::insufficient_data: return "insufficient_data";
    case ErrorCode::config: return "config";
    case ErrorCode::degree_drop: return "degree_drop";
    case ErrorCode::nonconvergence: return "nonconvergence";
    case ErrorCode::step_rejected: return "step_rejected";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace rootflow
