#include "telepilot/simworld.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "telepilot/error.hpp"

namespace telepilot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double slew(double current, double target, double max_delta) {
  return current + std::clamp(target - current, -max_delta, max_delta);
}

// Distance along the ray (origin, unit dir) to the segment, or +inf.
double ray_segment(const Eigen::Vector2d& origin, const Eigen::Vector2d& dir, const Segment& s) {
  const Eigen::Vector2d e = s.b - s.a;
  const double denom = dir.x() * e.y() - dir.y() * e.x();
  if (std::abs(denom) < 1e-15) return kInf;
  const Eigen::Vector2d w = s.a - origin;
  const double t = (w.x() * e.y() - w.y() * e.x()) / denom;
  const double u = (w.x() * dir.y() - w.y() * dir.x()) / denom;
  if (t < 0.0 || u < 0.0 || u > 1.0) return kInf;
  return t;
}

void add_rect(std::vector<Segment>& out, double x0, double y0, double x1, double y1) {
  out.push_back({{x0, y0}, {x1, y0}});
  out.push_back({{x1, y0}, {x1, y1}});
  out.push_back({{x1, y1}, {x0, y1}});
  out.push_back({{x0, y1}, {x0, y0}});
}

}  // namespace

double point_segment_distance(const Eigen::Vector2d& p, const Segment& s) {
  const Eigen::Vector2d e = s.b - s.a;
  const double len2 = e.squaredNorm();
  double t = len2 > 0.0 ? (p - s.a).dot(e) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (s.a + t * e - p).norm();
}

double World::clearance(const Eigen::Vector2d& p) const {
  double best = kInf;
  for (const Segment& s : obstacles) best = std::min(best, point_segment_distance(p, s));
  return best;
}

std::vector<Eigen::Vector2d> TargetZone::corners() const {
  const Eigen::Vector2d along(std::cos(heading), std::sin(heading));
  const Eigen::Vector2d across(-along.y(), along.x());
  const Eigen::Vector2d hl = 0.5 * length * along;
  const Eigen::Vector2d hw = 0.5 * width * across;
  return {center - hl - hw, center + hl - hw, center + hl + hw, center - hl + hw};
}

StepEvents step(const World& world, SimRobot& robot, const VelocityCmd& cmd, double dt,
                const PlantLimits& limits) {
  StepEvents events;
  if (robot.collided) return events;

  robot.v = slew(robot.v, cmd.v, limits.a_max * dt);
  robot.w = slew(robot.w, cmd.w, limits.alpha_max * dt);
  if (robot.v == 0.0 && robot.w == 0.0) return events;

  robot.true_pose = integrate(robot.true_pose, robot.v, robot.w, dt);
  const Eigen::Vector2d center(robot.true_pose.x, robot.true_pose.y);
  if (world.clearance(center) <= robot.shape.radius) {
    robot.collided = true;
    robot.v = 0.0;
    robot.w = 0.0;
    events.collision = true;
  }
  return events;
}

LaserScan raycast_lidar(const World& world, const OdomPose& pose, const LidarConfig& config,
                        double timestamp) {
  LaserScan scan;
  const int n = std::max(1, config.n_beams);
  scan.angle_increment = config.fov / n;
  scan.angle_min = -config.fov / 2.0;
  scan.max_range = config.max_range;
  scan.timestamp = timestamp;
  scan.ranges.assign(static_cast<std::size_t>(n), kInf);

  const Eigen::Vector2d origin(pose.x, pose.y);
  for (int i = 0; i < n; ++i) {
    const double angle = pose.theta + scan.angle_min + scan.angle_increment * i;
    const Eigen::Vector2d dir(std::cos(angle), std::sin(angle));
    double best = kInf;
    for (const Segment& s : world.obstacles) best = std::min(best, ray_segment(origin, dir, s));
    if (best > 0.0 && best <= config.max_range) scan.ranges[static_cast<std::size_t>(i)] = best;
  }
  return scan;
}

std::vector<std::string> scenario_names() { return {"open_space", "doorway", "block"}; }

ScenarioSpec scenario(const std::string& name) {
  ScenarioSpec spec;
  spec.name = name;
  // 6 x 6 m room; start 2 m from the back wall, target 2 m ahead of start.
  spec.world.bounds = {-2.0, -3.0, 4.0, 3.0};
  add_rect(spec.world.obstacles, -2.0, -3.0, 4.0, 3.0);
  spec.start = {0.0, 0.0, 0.0};
  spec.target.center = {2.0, 0.0};
  spec.target.heading = 0.0;
  spec.target.length = 0.6;
  spec.target.width = 1.0;

  if (name == "open_space") {
    return spec;
  }
  if (name == "doorway") {
    constexpr double kOpening = 0.9;
    spec.world.obstacles.push_back({{1.0, -3.0}, {1.0, -kOpening / 2.0}});
    spec.world.obstacles.push_back({{1.0, kOpening / 2.0}, {1.0, 3.0}});
    return spec;
  }
  if (name == "block") {
    add_rect(spec.world.obstacles, 0.5, -0.5, 1.5, 0.5);
    return spec;
  }
  throw Error(ErrorCode::UnknownScenario, "unknown scenario '" + name + "'");
}

Simulation::Simulation(World world, SimRobot robot, Config config, std::uint64_t seed)
    : world_(std::move(world)), robot_(robot), config_(config), rng_(seed) {}

StepEvents Simulation::advance(const VelocityCmd& cmd) {
  const OdomPose before = robot_.true_pose;
  const StepEvents events = step(world_, robot_, cmd, config_.dt, config_.plant);
  const PoseDelta delta = delta_between(before, robot_.true_pose);
  path_length_ += std::hypot(delta.dx, delta.dy);
  odom_ = compose(odom_, add_noise(delta, config_.odom_noise, rng_));
  ++tick_;
  return events;
}

LaserScan Simulation::scan() const {
  return raycast_lidar(world_, robot_.true_pose, config_.lidar, time());
}

}  // namespace telepilot
