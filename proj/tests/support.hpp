#pragma once

#include <functional>
#include <optional>

#include "telepilot/error.hpp"

namespace telepilot::testing {

// Code of the telepilot::Error thrown by fn, or nullopt if none was thrown.
inline std::optional<ErrorCode> error_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace telepilot::testing
