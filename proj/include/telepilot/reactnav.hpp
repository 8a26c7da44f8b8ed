#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "telepilot/odom.hpp"

namespace telepilot {

/// Planar range scan in the robot frame. Beams without a return hold
/// +infinity.
struct LaserScan {
  double angle_min = 0.0;
  double angle_increment = 0.0;
  std::vector<double> ranges;
  double max_range = 0.0;
  double timestamp = 0.0;

  std::size_t size() const { return ranges.size(); }
  bool is_return(std::size_t i) const;
  double bearing(std::size_t i) const { return angle_min + angle_increment * static_cast<double>(i); }
  /// Hit point of beam i, robot frame. Only meaningful when is_return(i).
  Eigen::Vector2d point(std::size_t i) const;
  std::vector<Eigen::Vector2d> points() const;
};

struct RobotShape {
  double radius = 0.25;
};

struct VelocityCmd {
  double v = 0.0;
  double w = 0.0;
};

struct NavGoal {
  double x = 0.0;
  double y = 0.0;
  double tolerance = 0.10;
};

struct NavConfig {
  double v_max = 0.6;
  double w_max = 1.5;
  double a_max = 1.0;
  double alpha_max = 3.0;
  double lookahead = 2.0;
  int n_alpha = 61;
  double w_goal = 0.6;
  double w_clear = 0.2;
  double w_free = 0.2;
  double safety_fraction = 0.15;
  double slow_threshold = 0.5;
  double goal_tolerance = 0.10;
  // Extra radius added to the footprint when scoring arcs; lidar beams
  // sample walls sparsely.
  double clearance_margin = 0.05;
  // Half-width, in grid cells, of the window used for the clearance term.
  int clearance_window = 3;
  // Fraction of a_max used for the approach to the goal.
  double approach_decel = 0.5;
  double control_period = 0.05;

  double alpha_at(int index) const;
};

/// Normalized free distance per sampled arc; 1 means free to the lookahead.
struct TpObstacles {
  std::vector<double> free;
};

/// Curvature of trajectory alpha: (2 / lookahead) * tan(alpha / 2).
/// Returns +-infinity at alpha = +-pi (turn in place).
double arc_for_alpha(double alpha, double lookahead);

/// Arc length travelled along a path of the given curvature (starting at
/// the origin heading +x) before a disc of `radius` first touches `point`.
/// Zero when already touching, +infinity when never (within one turn).
double arc_collision_distance(double curvature, const Eigen::Vector2d& point, double radius);

TpObstacles scan_to_tp(const LaserScan& scan, const RobotShape& shape, const NavConfig& config);

struct GoalTp {
  double alpha = 0.0;
  double distance = 0.0;    // arc length / lookahead, clamped to 1
  double arc_length = 0.0;  // meters, unclamped
};

/// Goal in the robot frame to trajectory space. Goals ahead map to the arc
/// through them; goals behind map to alpha = bearing, i.e. a tight turn.
GoalTp goal_to_tp(const Eigen::Vector2d& goal, double lookahead);

struct MotionChoice {
  bool blocked = false;
  int index = -1;
  double alpha = 0.0;
  VelocityCmd cmd;
};

MotionChoice choose_motion(const TpObstacles& tp, const GoalTp& goal, const NavConfig& config);

enum class NavStatus { Idle, Navigating, Arrived, Blocked };

std::string_view to_string(NavStatus status);

struct NavOutput {
  NavStatus status = NavStatus::Idle;
  VelocityCmd cmd;
};

/// Single-owner reactive navigator. Goals live in the odometry frame.
class Navigator {
 public:
  Navigator() = default;
  Navigator(NavConfig config, RobotShape shape) : config_(config), shape_(shape) {}

  void set_goal(const NavGoal& goal);
  void clear_goal();
  const std::optional<NavGoal>& goal() const { return goal_; }
  NavStatus status() const { return status_; }
  const NavConfig& config() const { return config_; }
  const RobotShape& shape() const { return shape_; }

  /// Uses the last emitted command as the current velocity estimate.
  NavOutput step(const OdomPose& pose, const LaserScan& scan);
  /// `current` is the measured base velocity.
  NavOutput step(const OdomPose& pose, const LaserScan& scan, const VelocityCmd& current);

 private:
  NavOutput decide(const OdomPose& pose, const LaserScan& scan, const VelocityCmd& current);

  NavConfig config_;
  RobotShape shape_;
  std::optional<NavGoal> goal_;
  NavStatus status_ = NavStatus::Idle;
  // Sign of the last sharp turn (|alpha| > pi/2); sharp turns keep their
  // direction until a gentle arc is chosen, which stops left/right dithering
  // in front of wide obstacles.
  int sharp_turn_sign_ = 0;
  VelocityCmd last_cmd_;
};

/// Minimum footprint clearance (meters, negative on penetration) along the
/// path obtained by holding `cmd` for `period` and then braking at `a_max`
/// on the same curvature. The path is sampled every `step` meters.
double command_clearance(const VelocityCmd& cmd, const LaserScan& scan, const RobotShape& shape,
                         double period, double a_max, double step = 0.005);

/// Minimum footprint clearance while velocities slew from `current` toward
/// `cmd` for `period` and then slew to rest, under the given acceleration
/// limits.
double transition_clearance(const VelocityCmd& current, const VelocityCmd& cmd,
                            const std::vector<Eigen::Vector2d>& points, const RobotShape& shape,
                            double period, double a_max, double alpha_max, double dt = 0.005);

}  // namespace telepilot
