#include "telepilot/error.hpp"

namespace telepilot {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::PointBehindCamera: return "point_behind_camera";
    case ErrorCode::NoConvergence: return "no_convergence";
    case ErrorCode::OutOfFrame: return "out_of_frame";
    case ErrorCode::AboveHorizon: return "above_horizon";
    case ErrorCode::BehindCamera: return "behind_camera";
    case ErrorCode::OutOfRange: return "out_of_range";
    case ErrorCode::JointCountMismatch: return "joint_count_mismatch";
    case ErrorCode::UnknownScenario: return "unknown_scenario";
    case ErrorCode::LengthMismatch: return "length_mismatch";
    case ErrorCode::InvalidConfig: return "invalid_config";
    case ErrorCode::InvalidCommand: return "invalid_command";
    case ErrorCode::IoFailure: return "io_failure";
    case ErrorCode::BindFailure: return "bind_failure";
  }
  return "unknown";
}

}  // namespace telepilot
