#include "doctest.h"

#include <cmath>
#include <limits>
#include <numbers>

#include "corner_probe.hpp"
#include "support.hpp"
#include "telepilot/rng.hpp"
#include "telepilot/simworld.hpp"

using namespace telepilot;
using std::numbers::pi;
using telepilot::testing::error_code;

namespace {

World wall_at_x(double x) {
  World w;
  w.obstacles.push_back({{x, -5.0}, {x, 5.0}});
  return w;
}

World box(double x0, double y0, double x1, double y1) {
  World w;
  w.obstacles.push_back({{x0, y0}, {x1, y0}});
  w.obstacles.push_back({{x1, y0}, {x1, y1}});
  w.obstacles.push_back({{x1, y1}, {x0, y1}});
  w.obstacles.push_back({{x0, y1}, {x0, y0}});
  return w;
}

World random_world(Rng& rng) {
  World w;
  const int n = 1 + static_cast<int>(rng.uniform() * 8);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d a(rng.uniform(-4, 4), rng.uniform(-4, 4));
    const double phi = rng.uniform(-pi, pi);
    const double len = rng.uniform(0.2, 3.0);
    w.obstacles.push_back({a, a + len * Eigen::Vector2d(std::cos(phi), std::sin(phi))});
  }
  return w;
}

bool is_sky(const std::uint8_t* p) { return p[0] == 150 && p[1] == 190 && p[2] == 235; }

}  // namespace

TEST_CASE("step follows the slew-limited trapezoid") {
  SimRobot robot;
  const World empty;
  const double dt = 0.05;
  double oracle = 0.0;
  for (int k = 1; k <= 80; ++k) {
    step(empty, robot, {0.5, 0.0}, dt);
    oracle += dt * std::min(0.5, 0.05 * k);
  }
  CHECK(robot.true_pose.x == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(oracle == doctest::Approx(1.8875));
  // Continuous ramp: 0.125 m while accelerating, then 3.5 s at 0.5 m/s.
  CHECK(std::abs(robot.true_pose.x - 1.875) <= 0.0125 + 1e-12);
  CHECK(robot.true_pose.y == 0.0);
  CHECK(robot.v == 0.5);
}

TEST_CASE("step turns at the angular slew limit") {
  SimRobot robot;
  step(World{}, robot, {0.0, 1.0}, 0.1);
  CHECK(robot.w == doctest::Approx(0.3));
  CHECK(robot.true_pose.theta == doctest::Approx(0.03));
}

TEST_CASE("step collides with a wall ahead") {
  SimRobot robot;
  const World w = wall_at_x(0.3 + robot.shape.radius);
  bool hit = false;
  int ticks = 0;
  while (!hit && ticks < 20) {
    hit = step(w, robot, {0.5, 0.0}, 0.05).collision;
    ++ticks;
  }
  CHECK(hit);
  CHECK(ticks * 0.05 < 1.0);
  CHECK(robot.collided);
  CHECK(robot.v == 0.0);
  CHECK(robot.w == 0.0);
}

TEST_CASE("step with a zero command leaves a resting robot in place") {
  SimRobot robot;
  robot.true_pose = {1.0, -2.0, 0.4};
  for (int i = 0; i < 10; ++i) step(World{}, robot, {0.0, 0.0}, 0.05);
  CHECK(robot.true_pose.x == 1.0);
  CHECK(robot.true_pose.y == -2.0);
  CHECK(robot.true_pose.theta == 0.4);
}

TEST_CASE("a collided robot stays frozen") {
  SimRobot robot;
  robot.collided = true;
  const StepEvents e = step(World{}, robot, {1.0, 1.0}, 0.05);
  CHECK_FALSE(e.collision);
  CHECK(robot.true_pose.x == 0.0);
  CHECK(robot.v == 0.0);
}

TEST_CASE("raycast_lidar examples") {
  const LidarConfig config;
  SUBCASE("empty world returns no returns") {
    const LaserScan scan = raycast_lidar(World{}, {}, config);
    REQUIRE(scan.ranges.size() == 360);
    for (double r : scan.ranges) CHECK(std::isinf(r));
  }
  SUBCASE("wall at x = 1") {
    const LaserScan scan = raycast_lidar(wall_at_x(1.0), {}, config);
    CHECK(scan.ranges[180] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(scan.ranges[225] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(scan.ranges[135] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(std::isinf(scan.ranges[0]));
  }
  SUBCASE("box around the sensor") {
    const LaserScan scan = raycast_lidar(box(-1, -1, 1, 1), {}, config);
    CHECK(scan.ranges[0] == doctest::Approx(1.0));
    CHECK(scan.ranges[90] == doctest::Approx(1.0));
    CHECK(scan.ranges[180] == doctest::Approx(1.0));
    CHECK(scan.ranges[270] == doctest::Approx(1.0));
    CHECK(scan.ranges[225] == doctest::Approx(std::sqrt(2.0)));
  }
  SUBCASE("beyond max range") {
    const LaserScan scan = raycast_lidar(wall_at_x(7.0), {}, config);
    CHECK(std::isinf(scan.ranges[180]));
  }
  SUBCASE("rotated sensor") {
    const LaserScan scan = raycast_lidar(wall_at_x(1.0), {0.0, 0.0, pi / 2}, config);
    CHECK(scan.ranges[90] == doctest::Approx(1.0));
  }
}

TEST_CASE("property: every lidar return lies on an obstacle") {
  Rng rng(31);
  const LidarConfig config;
  for (int trial = 0; trial < 100; ++trial) {
    const World w = random_world(rng);
    const OdomPose pose{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-pi, pi)};
    const LaserScan scan = raycast_lidar(w, pose, config);
    const auto points = scan.points();
    const double c = std::cos(pose.theta);
    const double s = std::sin(pose.theta);
    for (const Eigen::Vector2d& p : points) {
      const Eigen::Vector2d world_p(pose.x + c * p.x() - s * p.y(), pose.y + s * p.x() + c * p.y());
      CHECK(w.clearance(world_p) < 1e-9);
    }
  }
}

TEST_CASE("property: collision is reported before the footprint overlaps a segment") {
  Rng rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    const World w = random_world(rng);
    SimRobot robot;
    robot.true_pose = {rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-pi, pi)};
    if (w.clearance({robot.true_pose.x, robot.true_pose.y}) <= robot.shape.radius) continue;
    const VelocityCmd cmd{rng.uniform(-0.5, 0.5), rng.uniform(-1, 1)};
    for (int i = 0; i < 200 && !robot.collided; ++i) {
      const Eigen::Vector2d before(robot.true_pose.x, robot.true_pose.y);
      step(w, robot, cmd, 0.05);
      const Eigen::Vector2d after(robot.true_pose.x, robot.true_pose.y);
      if (!robot.collided) CHECK(w.clearance(after) > robot.shape.radius);
      CHECK(w.clearance(after) > robot.shape.radius - (after - before).norm() - 1e-12);
    }
  }
}

TEST_CASE("scenario catalogue") {
  CHECK(scenario_names() == std::vector<std::string>{"open_space", "doorway", "block"});
  for (const std::string& name : scenario_names()) {
    const ScenarioSpec spec = scenario(name);
    CHECK(spec.name == name);
    CHECK(spec.target.width == 1.0);
    CHECK(spec.target.length == 0.6);
    CHECK(std::hypot(spec.target.center.x() - spec.start.x, spec.target.center.y() - spec.start.y) ==
          doctest::Approx(2.0));
  }
  SUBCASE("open space has a clear corridor") {
    const ScenarioSpec spec = scenario("open_space");
    for (double x = 0.0; x <= 2.0; x += 0.05) CHECK(spec.world.clearance({x, 0.0}) > 1.0);
  }
  SUBCASE("doorway opening is 0.9 m") {
    const ScenarioSpec spec = scenario("doorway");
    CHECK(spec.world.clearance({1.0, 0.0}) == doctest::Approx(0.45));
    CHECK(spec.world.clearance({1.0, 0.45}) < 1e-12);
    CHECK(spec.world.clearance({1.0, -0.45}) < 1e-12);
    CHECK(spec.world.clearance({1.0, 0.449}) > 0.0);
    CHECK(spec.world.clearance({1.0, -0.449}) > 0.0);
  }
  SUBCASE("block sits across the straight path") {
    const ScenarioSpec spec = scenario("block");
    CHECK(spec.world.clearance({1.0, 0.0}) == doctest::Approx(0.5));
    CHECK(spec.world.clearance({1.0, 0.5}) < 1e-12);
    CHECK(spec.world.clearance({1.5, -0.5}) < 1e-12);
    CHECK(spec.world.clearance({0.5, 0.0}) < 1e-12);
  }
  CHECK(error_code([] { scenario("maze"); }) == ErrorCode::UnknownScenario);
}

TEST_CASE("simulation is deterministic for a fixed seed") {
  const ScenarioSpec spec = scenario("block");
  Simulation::Config config;
  config.odom_noise = {0.02, 0.02};
  auto run = [&] {
    SimRobot robot;
    robot.true_pose = spec.start;
    Simulation sim(spec.world, robot, config, 99);
    for (int i = 0; i < 100; ++i) sim.advance({0.3, i < 50 ? 0.5 : -0.5});
    return sim.odom();
  };
  const OdomPose a = run();
  const OdomPose b = run();
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(a.theta == b.theta);
}

TEST_CASE("simulation odometry is exact without noise") {
  SimRobot robot;
  Simulation sim(World{}, robot, {}, 1);
  for (int i = 0; i < 60; ++i) sim.advance({0.4, 0.3});
  CHECK(sim.odom().x == doctest::Approx(sim.robot().true_pose.x).epsilon(1e-12));
  CHECK(sim.odom().y == doctest::Approx(sim.robot().true_pose.y).epsilon(1e-12));
  CHECK(sim.time() == doctest::Approx(3.0));
  CHECK(sim.path_length() > 0.0);
}

TEST_CASE("render is bit-identical for identical inputs") {
  const ScenarioSpec spec = scenario("doorway");
  SimRobot robot;
  robot.true_pose = spec.start;
  RenderOptions options;
  options.target = spec.target;
  const RenderFrame a = render_camera(spec.world, robot, {}, CameraMount::webot(), options);
  const RenderFrame b = render_camera(spec.world, robot, {}, CameraMount::webot(), options);
  CHECK(a.rgb == b.rgb);
  CHECK(encode_png(a) == encode_png(b));
}

TEST_CASE("level camera puts the horizon on the principal row") {
  SimRobot robot;
  robot.camera_tilt = 0.0;
  const CameraModel model;
  const RenderFrame frame = render_camera(World{}, robot, model, CameraMount::webot());
  for (int u = 0; u < frame.width; ++u) {
    CHECK(is_sky(frame.pixel(u, 239)));
    CHECK_FALSE(is_sky(frame.pixel(u, 240)));
  }
}

TEST_CASE("png encoding starts with the signature") {
  RenderFrame frame;
  frame.width = 4;
  frame.height = 3;
  frame.rgb.assign(36, 128);
  const std::vector<std::uint8_t> png = encode_png(frame);
  const std::vector<std::uint8_t> signature{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  REQUIRE(png.size() > signature.size());
  CHECK(std::equal(signature.begin(), signature.end(), png.begin()));
}

TEST_CASE("rendered checkerboard corners unproject to their floor position") {
  const auto samples = telepilot::testing::sample_rendered_corners(100, 5, 4.0);
  REQUIRE(samples.size() == 100);
  double worst = 0.0;
  for (const auto& s : samples) {
    CHECK(s.detected);
    if (s.detected) worst = std::max(worst, (s.recovered_base - s.corner_base).norm());
  }
  CHECK(worst < 0.02);
}
