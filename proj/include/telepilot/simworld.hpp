#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "telepilot/camgeom.hpp"
#include "telepilot/kinchain.hpp"
#include "telepilot/odom.hpp"
#include "telepilot/reactnav.hpp"
#include "telepilot/rng.hpp"

namespace telepilot {

struct Segment {
  Eigen::Vector2d a;
  Eigen::Vector2d b;
};

struct Bounds {
  double xmin = -1.0;
  double ymin = -1.0;
  double xmax = 1.0;
  double ymax = 1.0;

  bool contains(const Eigen::Vector2d& p) const {
    return p.x() >= xmin && p.x() <= xmax && p.y() >= ymin && p.y() <= ymax;
  }
};

double point_segment_distance(const Eigen::Vector2d& p, const Segment& s);

struct World {
  std::vector<Segment> obstacles;
  Bounds bounds;

  /// Distance from p to the closest obstacle segment (+inf if none).
  double clearance(const Eigen::Vector2d& p) const;
};

/// Rectangular marked stopping area. `length` runs along `heading`.
struct TargetZone {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double heading = 0.0;
  double length = 0.6;
  double width = 1.0;

  std::vector<Eigen::Vector2d> corners() const;
};

struct SimRobot {
  OdomPose true_pose;
  RobotShape shape;
  double camera_tilt = -0.5;
  double camera_pan = 0.0;
  double v = 0.0;
  double w = 0.0;
  bool collided = false;
};

struct PlantLimits {
  double a_max = 1.0;      // m/s^2
  double alpha_max = 3.0;  // rad/s^2
};

struct StepEvents {
  bool collision = false;
};

/// Advances the plant by dt in (0, 0.1]: velocities slew toward `cmd`,
/// the pose follows the exact arc, and contact with any segment freezes the
/// robot.
StepEvents step(const World& world, SimRobot& robot, const VelocityCmd& cmd, double dt,
                const PlantLimits& limits = {});

struct LidarConfig {
  int n_beams = 360;
  double fov = 2.0 * 3.14159265358979323846;
  double max_range = 6.0;
};

LaserScan raycast_lidar(const World& world, const OdomPose& pose, const LidarConfig& config,
                        double timestamp = 0.0);

struct ScenarioSpec {
  std::string name;
  World world;
  OdomPose start;
  TargetZone target;
};

/// open_space, doorway or block. Throws Error(UnknownScenario).
ScenarioSpec scenario(const std::string& name);
std::vector<std::string> scenario_names();

/// RGB raster rendered from the robot's camera.
struct RenderFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel
  std::uint64_t seq = 0;
  double camera_tilt = 0.0;
  double camera_pan = 0.0;
  JointState joints;
  OdomPose true_pose;
  OdomPose odom_pose;

  const std::uint8_t* pixel(int u, int v) const { return &rgb[3 * (static_cast<std::size_t>(v) * width + u)]; }
};

struct RenderOptions {
  double checker_size = 0.5;
  double wall_height = 0.4;
  double ground_radius = 20.0;
  std::optional<TargetZone> target;
  double outline_width = 0.03;
  int subdivisions = 0;  // 0: automatic (1 without distortion, 4 with)
};

/// Pixel at which a world point appears in the robot's camera.
/// Throws Error(PointBehindCamera).
PixelPoint world_to_pixel(const CameraModel& model, const CameraMount& mount, const SimRobot& robot,
                          const Eigen::Vector3d& p_world);

RenderFrame render_camera(const World& world, const SimRobot& robot, const CameraModel& model,
                          const CameraMount& mount, const RenderOptions& options = {});

/// Writes an 8-bit RGB PNG. Throws Error(IoFailure).
void write_png(const std::string& path, const RenderFrame& frame);
std::vector<std::uint8_t> encode_png(const RenderFrame& frame);

/// Everything one owner advances tick by tick: plant, noisy odometry and
/// sensor generation.
class Simulation {
 public:
  struct Config {
    double dt = 0.05;
    PlantLimits plant;
    LidarConfig lidar;
    OdomNoise odom_noise;
  };

  Simulation(World world, SimRobot robot, Config config, std::uint64_t seed);

  /// One tick: plant step, then odometry from the realised motion.
  StepEvents advance(const VelocityCmd& cmd);
  LaserScan scan() const;

  const World& world() const { return world_; }
  const SimRobot& robot() const { return robot_; }
  SimRobot& robot() { return robot_; }
  const OdomPose& odom() const { return odom_; }
  const Config& config() const { return config_; }
  std::uint64_t tick() const { return tick_; }
  double time() const { return static_cast<double>(tick_) * config_.dt; }
  double path_length() const { return path_length_; }

 private:
  World world_;
  SimRobot robot_;
  Config config_;
  Rng rng_;
  OdomPose odom_;
  std::uint64_t tick_ = 0;
  double path_length_ = 0.0;
};

}  // namespace telepilot
