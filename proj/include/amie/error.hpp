#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace amie {

enum class ErrorCode {
  fit_error,
  layout_error,
  insufficient_signal,
  degenerate_geometry,
  estimation_error,
  parse_error,
  validation_error,
  lookup_error,
  unknown_destination,
  navigation_state,
  unknown_room,
  weather_unavailable,
  sim_disabled,
  bad_frame,
  missing_field,
  unknown_kind,
  config_error,
  internal_error,
};

// Stable machine-readable names; these appear on the wire.
constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::fit_error: return "fit_error";
    case ErrorCode::layout_error: return "layout_error";
    case ErrorCode::insufficient_signal: return "insufficient_signal";
    case ErrorCode::degenerate_geometry: return "degenerate_geometry";
    case ErrorCode::estimation_error: return "estimation_error";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::validation_error: return "validation_error";
    case ErrorCode::lookup_error: return "lookup_error";
    case ErrorCode::unknown_destination: return "unknown_destination";
    case ErrorCode::navigation_state: return "navigation_state";
    case ErrorCode::unknown_room: return "unknown_room";
    case ErrorCode::weather_unavailable: return "weather_unavailable";
    case ErrorCode::sim_disabled: return "sim_disabled";
    case ErrorCode::bad_frame: return "bad_frame";
    case ErrorCode::missing_field: return "missing_field";
    case ErrorCode::unknown_kind: return "unknown_kind";
    case ErrorCode::config_error: return "config_error";
    case ErrorCode::internal_error: return "internal_error";
  }
  return "internal_error";
}

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // Wire form of the code. missing_field carries the field name as a suffix.
  std::string code_string() const {
    std::string s(to_string(code_));
    if (code_ == ErrorCode::missing_field && !detail_.empty())
      s += ":" + detail_;
    return s;
  }

  const std::string& detail() const noexcept { return detail_; }

  static Error missing_field(const std::string& field) {
    Error e(ErrorCode::missing_field, "missing required field '" + field + "'");
    e.detail_ = field;
    return e;
  }

private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace amie
