#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace telepilot {

enum class ErrorCode {
  PointBehindCamera,
  NoConvergence,
  OutOfFrame,
  AboveHorizon,
  BehindCamera,
  OutOfRange,
  JointCountMismatch,
  UnknownScenario,
  LengthMismatch,
  InvalidConfig,
  InvalidCommand,
  IoFailure,
  BindFailure,
};

/// Wire-level name of an error code, e.g. "above_horizon".
std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace telepilot
