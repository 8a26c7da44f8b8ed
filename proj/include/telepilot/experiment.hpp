#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "telepilot/camgeom.hpp"
#include "telepilot/kinchain.hpp"
#include "telepilot/reactnav.hpp"
#include "telepilot/simworld.hpp"

namespace telepilot {

enum class Controller { Auto, Manual };

std::string_view to_string(Controller controller);

/// Keyboard-style operator surrogate: quantized commands, a fixed decision
/// rate, a reaction delay and heading-then-drive behaviour along a hand
/// planned list of waypoints.
struct ManualScript {
  double decision_period = 0.5;
  double reaction_delay = 0.25;
  double v_drive = 0.4;
  double w_turn = 0.8;
  double turn_in_place_error = 0.3;  // rad
  double steer_error = 0.1;          // rad
  double waypoint_radius = 0.25;
  double stop_radius = 0.12;
  double block_side_offset = 1.2;  // lateral offset of the detour around a blocking obstacle
};

struct ExperimentConfig {
  CameraModel camera;
  CameraMount mount = CameraMount::webot();
  NavConfig nav;
  RobotShape shape;
  Simulation::Config sim{0.05, {}, {}, {0.01, 0.01}};
  ManualScript manual;
  double camera_tilt = -0.5;
  double timeout = 60.0;
  double jitter_xy = 0.05;
  double jitter_theta = 0.05;
};

struct TrialResult {
  int index = 0;
  double x_err_cm = 0.0;
  double y_err_cm = 0.0;
  double f_err_rad = 0.0;
  double t_s = 0.0;
  bool collided = false;
  bool arrived = false;
  bool timed_out = false;
  double path_length = 0.0;
  int commands = 0;
  int safety_violations = 0;
  double min_command_clearance = 0.0;
  PixelPoint click;  // auto only
};

TrialResult run_trial(const ScenarioSpec& spec, Controller controller, const ExperimentConfig& config,
                      int index, std::uint64_t seed);

/// n trials with independent, index-derived seeds. Trial i of the auto and
/// manual controllers share the same start jitter.
std::vector<TrialResult> run_trials(const ScenarioSpec& spec, Controller controller, int n,
                                    std::uint64_t seed, const ExperimentConfig& config);

struct ComparisonRow {
  double x_pct = 0.0;
  double y_pct = 0.0;
  double f_pct = 0.0;
  double t_pct = 0.0;
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  ComparisonRow mean;
};

/// Percent improvement of auto over manual per trial pair:
/// 100 * (|manual| - |auto|) / max(|manual|, eps), eps = 0.1 cm, 0.01 rad,
/// 0.1 s. Throws Error(LengthMismatch).
Comparison summarize(const std::vector<TrialResult>& automatic, const std::vector<TrialResult>& manual);

/// Heading error is reported only where the final heading matters.
bool reports_heading(const std::string& scenario_name);

void write_trials_csv(std::ostream& out, const std::vector<TrialResult>& results, bool with_heading);
void write_comparison_csv(std::ostream& out, const Comparison& comparison, bool with_heading);
void write_console_summary(std::ostream& out, const std::string& scenario_name, Controller controller,
                           const std::vector<TrialResult>& results);

/// Auto-controller invariants: no collision, no unsafe command, arrival
/// rate >= min_success. Returns a description per violation.
std::vector<std::string> check_invariants(const std::string& scenario_name,
                                          const std::vector<TrialResult>& automatic,
                                          double min_success = 0.95);

}  // namespace telepilot
