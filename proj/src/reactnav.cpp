#include "telepilot/reactnav.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace telepilot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

bool LaserScan::is_return(std::size_t i) const {
  const double r = ranges[i];
  return std::isfinite(r) && r > 0.0 && r <= max_range;
}

Eigen::Vector2d LaserScan::point(std::size_t i) const {
  const double b = bearing(i);
  return {ranges[i] * std::cos(b), ranges[i] * std::sin(b)};
}

std::vector<Eigen::Vector2d> LaserScan::points() const {
  std::vector<Eigen::Vector2d> out;
  out.reserve(ranges.size());
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    if (is_return(i)) out.push_back(point(i));
  }
  return out;
}

double NavConfig::alpha_at(int index) const {
  if (n_alpha <= 1) return 0.0;
  // Exactly antisymmetric, with an exact zero at the centre.
  const double span = static_cast<double>(n_alpha - 1);
  return std::numbers::pi * (2.0 * static_cast<double>(index) - span) / span;
}

double arc_for_alpha(double alpha, double lookahead) {
  if (std::abs(alpha) >= std::numbers::pi - 1e-12) return alpha > 0.0 ? kInf : -kInf;
  return 2.0 / lookahead * std::tan(alpha / 2.0);
}

double arc_collision_distance(double curvature, const Eigen::Vector2d& point, double radius) {
  if (point.norm() <= radius) return 0.0;
  if (std::isinf(curvature)) return kInf;

  if (std::abs(curvature) < 1e-12) {
    if (std::abs(point.y()) > radius) return kInf;
    const double s = point.x() - std::sqrt(radius * radius - point.y() * point.y());
    return s >= 0.0 ? s : kInf;
  }

  // Right turns are mirrored onto left turns.
  const Eigen::Vector2d p(point.x(), curvature > 0.0 ? point.y() : -point.y());
  const double r = 1.0 / std::abs(curvature);
  const Eigen::Vector2d center(0.0, r);
  const Eigen::Vector2d to_point = p - center;
  const double d = to_point.norm();
  if (std::abs(d - r) > radius) return kInf;

  // Intersections of the path circle with the contact circle around p.
  const double a = (r * r - radius * radius + d * d) / (2.0 * d);
  const double h = std::sqrt(std::max(0.0, r * r - a * a));
  const Eigen::Vector2d u = to_point / d;
  const Eigen::Vector2d perp(-u.y(), u.x());
  double best = kInf;
  for (const double sign : {1.0, -1.0}) {
    const Eigen::Vector2d q = a * u + sign * h * perp;  // relative to center
    // On a left turn the robot sits at polar angle (heading - pi/2).
    double heading = std::atan2(q.y(), q.x()) + std::numbers::pi / 2.0;
    heading = std::fmod(heading, kTwoPi);
    if (heading < 0.0) heading += kTwoPi;
    best = std::min(best, heading * r);
  }
  return best;
}

TpObstacles scan_to_tp(const LaserScan& scan, const RobotShape& shape, const NavConfig& config) {
  const double inflated = shape.radius + config.clearance_margin;
  const double reach = config.lookahead + inflated;

  std::vector<Eigen::Vector2d> near;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    if (!scan.is_return(i)) continue;
    const Eigen::Vector2d p = scan.point(i);
    if (p.norm() <= reach) near.push_back(p);
  }

  TpObstacles tp;
  tp.free.assign(static_cast<std::size_t>(config.n_alpha), 1.0);
  for (int i = 0; i < config.n_alpha; ++i) {
    const double curvature = arc_for_alpha(config.alpha_at(i), config.lookahead);
    double fraction = 1.0;
    for (const Eigen::Vector2d& p : near) {
      // Points already inside the margin block any approach closer than
      // their current distance, so the robot can still move away.
      const double radius = std::clamp(p.norm() - 1e-3, shape.radius, inflated);
      const double s = arc_collision_distance(curvature, p, radius);
      fraction = std::min(fraction, s / config.lookahead);
      if (fraction <= 0.0) break;
    }
    tp.free[static_cast<std::size_t>(i)] = std::clamp(fraction, 0.0, 1.0);
  }
  return tp;
}

GoalTp goal_to_tp(const Eigen::Vector2d& goal, double lookahead) {
  const double r = goal.norm();
  if (r < 1e-9) return {};
  const double bearing = std::atan2(goal.y(), goal.x());

  GoalTp out;
  if (goal.x() >= 0.0) {
    const double curvature = 2.0 * std::sin(bearing) / r;
    out.alpha = 2.0 * std::atan(curvature * lookahead / 2.0);
    // Chord of length r subtending a heading change of 2 * bearing.
    out.arc_length = std::abs(bearing) < 1e-9 ? r : r * bearing / std::sin(bearing);
  } else {
    out.alpha = bearing;
    out.arc_length = r;
  }
  out.distance = std::min(1.0, out.arc_length / lookahead);
  return out;
}

MotionChoice choose_motion(const TpObstacles& tp, const GoalTp& goal, const NavConfig& config) {
  const int n = static_cast<int>(tp.free.size());
  MotionChoice choice;
  double best_score = -kInf;

  for (int i = 0; i < n; ++i) {
    const double free = tp.free[static_cast<std::size_t>(i)];
    if (free <= config.safety_fraction) continue;

    double clearance = free;
    for (int j = std::max(0, i - config.clearance_window);
         j <= std::min(n - 1, i + config.clearance_window); ++j) {
      clearance = std::min(clearance, tp.free[static_cast<std::size_t>(j)]);
    }
    const double alpha = config.alpha_at(i);
    const double score = config.w_goal * (1.0 - std::abs(alpha - goal.alpha) / std::numbers::pi) +
                         config.w_clear * clearance + config.w_free * free;

    bool better = score > best_score;
    if (!better && score == best_score) {
      // Ties: smaller |alpha|, then negative alpha.
      const double cur = std::abs(choice.alpha);
      better = std::abs(alpha) < cur || (std::abs(alpha) == cur && alpha < choice.alpha);
    }
    if (better) {
      best_score = score;
      choice.index = i;
      choice.alpha = alpha;
    }
  }

  if (choice.index < 0) {
    choice.blocked = true;
    return choice;
  }

  const double free = tp.free[static_cast<std::size_t>(choice.index)];
  const double slow = std::min(1.0, free / config.slow_threshold);
  const double curvature = arc_for_alpha(choice.alpha, config.lookahead);
  double v = config.v_max * free * slow;
  double w = 0.0;
  if (std::isinf(curvature)) {
    w = std::copysign(config.w_max * free * slow, curvature);
    v = 0.0;
  } else {
    w = v * curvature;
    if (std::abs(w) > config.w_max) {
      const double scale = config.w_max / std::abs(w);
      v *= scale;
      w *= scale;
    }
  }
  choice.cmd = {v, w};
  return choice;
}

std::string_view to_string(NavStatus status) {
  switch (status) {
    case NavStatus::Idle: return "idle";
    case NavStatus::Navigating: return "navigating";
    case NavStatus::Arrived: return "arrived";
    case NavStatus::Blocked: return "blocked";
  }
  return "idle";
}

void Navigator::set_goal(const NavGoal& goal) {
  goal_ = goal;
  status_ = NavStatus::Navigating;
  sharp_turn_sign_ = 0;
}

void Navigator::clear_goal() {
  goal_.reset();
  status_ = NavStatus::Idle;
  sharp_turn_sign_ = 0;
}

NavOutput Navigator::step(const OdomPose& pose, const LaserScan& scan) {
  return step(pose, scan, last_cmd_);
}

NavOutput Navigator::step(const OdomPose& pose, const LaserScan& scan, const VelocityCmd& current) {
  const NavOutput out = decide(pose, scan, current);
  last_cmd_ = out.cmd;
  return out;
}

NavOutput Navigator::decide(const OdomPose& pose, const LaserScan& scan, const VelocityCmd& current) {
  if (!goal_) {
    status_ = NavStatus::Idle;
    return {status_, {}};
  }
  if (status_ == NavStatus::Arrived) return {status_, {}};

  const double dx = goal_->x - pose.x;
  const double dy = goal_->y - pose.y;
  if (std::hypot(dx, dy) <= goal_->tolerance) {
    status_ = NavStatus::Arrived;
    return {status_, {}};
  }

  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  const Eigen::Vector2d local(c * dx + s * dy, -s * dx + c * dy);

  const TpObstacles tp = scan_to_tp(scan, shape_, config_);
  const GoalTp goal_tp = goal_to_tp(local, config_.lookahead);
  MotionChoice choice = choose_motion(tp, goal_tp, config_);
  const auto sharp_sign = [](double alpha) {
    return std::abs(alpha) > std::numbers::pi / 2.0 ? (alpha > 0.0 ? 1 : -1) : 0;
  };
  if (!choice.blocked && sharp_turn_sign_ != 0 && sharp_sign(choice.alpha) == -sharp_turn_sign_) {
    TpObstacles same_side = tp;
    for (int i = 0; i < config_.n_alpha; ++i) {
      const double alpha = config_.alpha_at(i);
      if (alpha * sharp_turn_sign_ < 0.0) same_side.free[static_cast<std::size_t>(i)] = 0.0;
    }
    const MotionChoice kept = choose_motion(same_side, goal_tp, config_);
    if (!kept.blocked) choice = kept;
  }
  sharp_turn_sign_ = choice.blocked ? 0 : sharp_sign(choice.alpha);
  if (choice.blocked) {
    status_ = NavStatus::Blocked;
    return {status_, {}};
  }

  // Brake envelope so the robot can stop on the goal.
  VelocityCmd cmd = choice.cmd;
  const double decel = config_.approach_decel * config_.a_max;
  const double room = std::max(0.0, goal_tp.arc_length - 0.5 * goal_->tolerance);
  const double v_env = std::sqrt(2.0 * decel * room);
  if (std::abs(cmd.v) > v_env) {
    const double scale = v_env / std::abs(cmd.v);
    cmd.v *= scale;
    cmd.w *= scale;
  }

  // If the slew from the current motion onto the new arc could touch an
  // obstacle, brake along the current curvature instead.
  const std::vector<Eigen::Vector2d> points = scan.points();
  const double period = config_.control_period;
  if (transition_clearance(current, cmd, points, shape_, period, config_.a_max,
                           config_.alpha_max) <= 0.0) {
    const double speed = std::max(0.0, std::abs(current.v) - config_.a_max * period);
    const double v = std::copysign(speed, current.v);
    const double w = current.v != 0.0 ? current.w * (v / current.v) : 0.0;
    cmd = {v, w};
  }
  status_ = NavStatus::Navigating;
  return {status_, cmd};
}

double command_clearance(const VelocityCmd& cmd, const LaserScan& scan, const RobotShape& shape,
                         double period, double a_max, double step) {
  const std::vector<Eigen::Vector2d> pts = scan.points();
  auto clearance_at = [&](const OdomPose& pose) {
    double best = kInf;
    for (const Eigen::Vector2d& p : pts) {
      best = std::min(best, std::hypot(p.x() - pose.x, p.y() - pose.y) - shape.radius);
    }
    return best;
  };

  const double speed = std::abs(cmd.v);
  const double travel = speed * period + speed * speed / (2.0 * a_max);
  double clearance = clearance_at({});
  if (speed == 0.0) return clearance;  // turning in place sweeps no new area

  const int samples = std::max(1, static_cast<int>(std::ceil(travel / step)));
  const double ds = travel / samples;
  const double dt = ds / speed;
  OdomPose pose;
  for (int k = 0; k < samples; ++k) {
    pose = integrate(pose, cmd.v, cmd.w, dt);
    clearance = std::min(clearance, clearance_at(pose));
  }
  return clearance;
}

double transition_clearance(const VelocityCmd& current, const VelocityCmd& cmd,
                            const std::vector<Eigen::Vector2d>& points, const RobotShape& shape,
                            double period, double a_max, double alpha_max, double dt) {
  const double speed = std::max(std::abs(current.v), std::abs(cmd.v));
  const double reach = speed * period + speed * speed / (2.0 * a_max) + shape.radius + 0.1;
  std::vector<Eigen::Vector2d> near;
  double far_clearance = kInf;
  for (const Eigen::Vector2d& p : points) {
    if (p.norm() <= reach) {
      near.push_back(p);
    } else {
      far_clearance = std::min(far_clearance, p.norm() - reach + 0.1);
    }
  }
  auto clearance_at = [&](const OdomPose& pose) {
    double best = far_clearance;
    for (const Eigen::Vector2d& p : near) {
      best = std::min(best, std::hypot(p.x() - pose.x, p.y() - pose.y) - shape.radius);
    }
    return best;
  };
  auto slew = [](double value, double target, double limit) {
    return value + std::clamp(target - value, -limit, limit);
  };

  OdomPose pose;
  double v = current.v;
  double w = current.w;
  double clearance = clearance_at(pose);
  for (double t = 0.0; t < period - 1e-12; t += dt) {
    v = slew(v, cmd.v, a_max * dt);
    w = slew(w, cmd.w, alpha_max * dt);
    pose = integrate(pose, v, w, dt);
    clearance = std::min(clearance, clearance_at(pose));
  }
  while (v != 0.0) {
    v = slew(v, 0.0, a_max * dt);
    w = slew(w, 0.0, alpha_max * dt);
    pose = integrate(pose, v, w, dt);
    clearance = std::min(clearance, clearance_at(pose));
  }
  return clearance;
}

}  // namespace telepilot
