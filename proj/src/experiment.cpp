#include "telepilot/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>

#include "telepilot/error.hpp"

namespace telepilot {

namespace {

constexpr std::uint64_t kNoiseStream = 0x6F646F6DULL;

// Fixed-point formatting without "-0.0".
std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string s(buf);
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

OdomPose jittered_start(const ScenarioSpec& spec, const ExperimentConfig& config, Rng& rng) {
  const double dx = rng.uniform(-config.jitter_xy, config.jitter_xy);
  const double dy = rng.uniform(-config.jitter_xy, config.jitter_xy);
  const double dth = rng.uniform(-config.jitter_theta, config.jitter_theta);
  return compose(spec.start, {dx, dy, dth});
}

void finish(TrialResult& result, const ScenarioSpec& spec, const Simulation& sim) {
  const OdomPose& pose = sim.robot().true_pose;
  const double c = std::cos(spec.target.heading);
  const double s = std::sin(spec.target.heading);
  const double dx = pose.x - spec.target.center.x();
  const double dy = pose.y - spec.target.center.y();
  result.x_err_cm = 100.0 * (c * dx + s * dy);
  result.y_err_cm = 100.0 * (-s * dx + c * dy);
  result.f_err_rad = wrap_angle(pose.theta - spec.target.heading);
  result.t_s = sim.time();
  result.path_length = sim.path_length();
  result.collided = sim.robot().collided;
}

bool stopped(const SimRobot& robot) { return robot.v == 0.0 && robot.w == 0.0; }

void run_auto(TrialResult& result, const ScenarioSpec& spec, const ExperimentConfig& config,
              Simulation& sim) {
  RenderOptions options;
  options.target = spec.target;
  RenderFrame frame = render_camera(sim.world(), sim.robot(), config.camera, config.mount, options);
  frame.odom_pose = sim.odom();

  // The operator clicks the pixel under the centre of the marked area.
  const PixelPoint exact = world_to_pixel(config.camera, config.mount, sim.robot(),
                                          {spec.target.center.x(), spec.target.center.y(), 0.0});
  result.click = {std::round(exact.u), std::round(exact.v)};
  const GroundPoint ground = pixel_to_ground(config.camera, config.mount.links, frame.joints,
                                             config.mount.remap, result.click);
  const OdomPose goal_odom = compose(frame.odom_pose, {ground.x, ground.y, 0.0});

  Navigator nav(config.nav, config.shape);
  nav.set_goal({goal_odom.x, goal_odom.y, config.nav.goal_tolerance});
  result.min_command_clearance = std::numeric_limits<double>::infinity();

  while (sim.time() < config.timeout) {
    const LaserScan scan = sim.scan();
    const NavOutput out = nav.step(sim.odom(), scan, {sim.robot().v, sim.robot().w});
    if (out.status == NavStatus::Arrived && stopped(sim.robot())) {
      result.arrived = true;
      return;
    }
    const double clearance = command_clearance(out.cmd, scan, config.shape, sim.config().dt,
                                               config.nav.a_max);
    result.min_command_clearance = std::min(result.min_command_clearance, clearance);
    if (!(clearance > 0.0)) ++result.safety_violations;
    ++result.commands;
    sim.advance(out.cmd);
    if (sim.robot().collided) return;
  }
  result.timed_out = true;
}

std::vector<Eigen::Vector2d> manual_route(const ScenarioSpec& spec, const ManualScript& script) {
  std::vector<Eigen::Vector2d> route;
  if (spec.name == "block") {
    // Sidestep left, pass the block, then come back in to the target.
    const Eigen::Vector2d start(spec.start.x, spec.start.y);
    const Eigen::Vector2d span = spec.target.center - start;
    const Eigen::Vector2d left = Eigen::Vector2d(-span.y(), span.x()).normalized();
    route.push_back(start + 0.05 * span + script.block_side_offset * left);
    route.push_back(start + span + script.block_side_offset * left);
  }
  route.push_back(spec.target.center);
  return route;
}

void run_manual(TrialResult& result, const ScenarioSpec& spec, const ExperimentConfig& config,
                Simulation& sim) {
  const ManualScript& script = config.manual;
  const std::vector<Eigen::Vector2d> route = manual_route(spec, script);
  std::size_t waypoint = 0;
  struct Keypress {
    double at;          // when the command takes effect
    double turn_until;  // when the turn key is released
    VelocityCmd cmd;
  };
  VelocityCmd active;
  double turn_until = 0.0;
  std::optional<Keypress> pending;
  bool stop_issued = false;
  const auto decision_ticks =
      std::max<std::uint64_t>(1, std::llround(script.decision_period / sim.config().dt));

  while (sim.time() < config.timeout) {
    if (sim.tick() % decision_ticks == 0 && !stop_issued) {
      const OdomPose& pose = sim.robot().true_pose;
      Eigen::Vector2d to_goal = route[waypoint] - Eigen::Vector2d(pose.x, pose.y);
      const bool last = waypoint + 1 == route.size();
      const Eigen::Vector2d from =
          waypoint == 0 ? Eigen::Vector2d(spec.start.x, spec.start.y) : route[waypoint - 1];
      const bool passed = to_goal.dot(route[waypoint] - from) < 0.0;
      if (!last && (to_goal.norm() < script.waypoint_radius || passed)) {
        ++waypoint;
        to_goal = route[waypoint] - Eigen::Vector2d(pose.x, pose.y);
      }
      VelocityCmd cmd;
      if (waypoint + 1 == route.size() && to_goal.norm() < script.stop_radius) {
        stop_issued = true;
      } else {
        const double error = wrap_angle(std::atan2(to_goal.y(), to_goal.x()) - pose.theta);
        const double turn = std::copysign(script.w_turn, error);
        if (std::abs(error) > script.turn_in_place_error) {
          cmd = {0.0, turn};
        } else if (std::abs(error) > script.steer_error) {
          cmd = {script.v_drive, turn};
        } else {
          cmd = {script.v_drive, 0.0};
        }
      }
      const double at = sim.time() + script.reaction_delay;
      const double error = cmd.w == 0.0 ? 0.0 : std::abs(wrap_angle(
          std::atan2(to_goal.y(), to_goal.x()) - pose.theta));
      pending = Keypress{at, at + error / script.w_turn, cmd};
    }
    if (pending && sim.time() + 1e-9 >= pending->at) {
      active = pending->cmd;
      turn_until = pending->turn_until;
      pending.reset();
    }
    if (active.w != 0.0 && sim.time() + 1e-9 >= turn_until) active.w = 0.0;
    if (stop_issued && !pending && stopped(sim.robot()) && active.v == 0.0 && active.w == 0.0) {
      result.arrived = true;
      return;
    }
    sim.advance(active);
    if (sim.robot().collided) return;
  }
  result.timed_out = true;
}

double improvement(double manual, double automatic, double eps) {
  return 100.0 * (std::abs(manual) - std::abs(automatic)) / std::max(std::abs(manual), eps);
}

}  // namespace

std::string_view to_string(Controller controller) {
  return controller == Controller::Auto ? "auto" : "manual";
}

TrialResult run_trial(const ScenarioSpec& spec, Controller controller, const ExperimentConfig& config,
                      int index, std::uint64_t seed) {
  Rng jitter(Rng::derive(seed, static_cast<std::uint64_t>(index)));
  SimRobot robot;
  robot.true_pose = jittered_start(spec, config, jitter);
  robot.shape = config.shape;
  robot.camera_tilt = config.camera_tilt;
  Simulation sim(spec.world, robot, config.sim,
                 Rng::derive(seed ^ kNoiseStream, static_cast<std::uint64_t>(index)));

  TrialResult result;
  result.index = index;
  if (controller == Controller::Auto) {
    run_auto(result, spec, config, sim);
  } else {
    run_manual(result, spec, config, sim);
  }
  finish(result, spec, sim);
  return result;
}

std::vector<TrialResult> run_trials(const ScenarioSpec& spec, Controller controller, int n,
                                    std::uint64_t seed, const ExperimentConfig& config) {
  std::vector<TrialResult> results;
  results.reserve(static_cast<std::size_t>(std::max(0, n)));
  for (int i = 0; i < n; ++i) results.push_back(run_trial(spec, controller, config, i + 1, seed));
  return results;
}

Comparison summarize(const std::vector<TrialResult>& automatic, const std::vector<TrialResult>& manual) {
  if (automatic.size() != manual.size()) {
    throw Error(ErrorCode::LengthMismatch, "auto and manual trial counts differ");
  }
  Comparison out;
  for (std::size_t i = 0; i < automatic.size(); ++i) {
    const TrialResult& a = automatic[i];
    const TrialResult& m = manual[i];
    out.rows.push_back({improvement(m.x_err_cm, a.x_err_cm, 0.1),
                        improvement(m.y_err_cm, a.y_err_cm, 0.1),
                        improvement(m.f_err_rad, a.f_err_rad, 0.01), improvement(m.t_s, a.t_s, 0.1)});
  }
  if (!out.rows.empty()) {
    for (const ComparisonRow& r : out.rows) {
      out.mean.x_pct += r.x_pct;
      out.mean.y_pct += r.y_pct;
      out.mean.f_pct += r.f_pct;
      out.mean.t_pct += r.t_pct;
    }
    const double n = static_cast<double>(out.rows.size());
    out.mean = {out.mean.x_pct / n, out.mean.y_pct / n, out.mean.f_pct / n, out.mean.t_pct / n};
  }
  return out;
}

bool reports_heading(const std::string& scenario_name) { return scenario_name == "open_space"; }

void write_trials_csv(std::ostream& out, const std::vector<TrialResult>& results, bool with_heading) {
  out << (with_heading ? "trial,x_cm,y_cm,f_rad,t_sec\n" : "trial,x_cm,y_cm,t_sec\n");
  for (const TrialResult& r : results) {
    out << r.index << ',' << fixed(r.x_err_cm, 1) << ',' << fixed(r.y_err_cm, 1) << ',';
    if (with_heading) out << fixed(r.f_err_rad, 2) << ',';
    out << fixed(r.t_s, 1) << '\n';
  }
}

void write_comparison_csv(std::ostream& out, const Comparison& comparison, bool with_heading) {
  out << (with_heading ? "trial,x_pct,y_pct,f_pct,t_pct\n" : "trial,x_pct,y_pct,t_pct\n");
  auto row = [&](const std::string& label, const ComparisonRow& r) {
    out << label << ',' << fixed(r.x_pct, 0) << ',' << fixed(r.y_pct, 0) << ',';
    if (with_heading) out << fixed(r.f_pct, 0) << ',';
    out << fixed(r.t_pct, 0) << '\n';
  };
  for (std::size_t i = 0; i < comparison.rows.size(); ++i) row(std::to_string(i + 1), comparison.rows[i]);
  row("Results", comparison.mean);
}

void write_console_summary(std::ostream& out, const std::string& scenario_name, Controller controller,
                           const std::vector<TrialResult>& results) {
  int arrived = 0, collided = 0, timeouts = 0, unsafe = 0;
  double sx = 0, sy = 0, st = 0, mx = 0, my = 0;
  for (const TrialResult& r : results) {
    arrived += r.arrived && !r.collided ? 1 : 0;
    collided += r.collided ? 1 : 0;
    timeouts += r.timed_out ? 1 : 0;
    unsafe += r.safety_violations;
    sx += std::abs(r.x_err_cm);
    sy += std::abs(r.y_err_cm);
    st += r.t_s;
    mx = std::max(mx, std::abs(r.x_err_cm));
    my = std::max(my, std::abs(r.y_err_cm));
  }
  const double n = std::max<std::size_t>(1, results.size());
  char line[256];
  std::snprintf(line, sizeof line,
                "%-10s %-6s n=%-4zu arrived=%-4d collisions=%-3d timeouts=%-3d unsafe_cmds=%-3d "
                "mean|x|=%5.1fcm mean|y|=%5.1fcm max|x|=%5.1fcm max|y|=%5.1fcm mean_t=%5.1fs\n",
                scenario_name.c_str(), std::string(to_string(controller)).c_str(), results.size(),
                arrived, collided, timeouts, unsafe, sx / n, sy / n, mx, my, st / n);
  out << line;
}

std::vector<std::string> check_invariants(const std::string& scenario_name,
                                          const std::vector<TrialResult>& automatic,
                                          double min_success) {
  std::vector<std::string> failures;
  int success = 0;
  for (const TrialResult& r : automatic) {
    if (r.collided) failures.push_back(scenario_name + ": trial " + std::to_string(r.index) + " collided");
    if (r.safety_violations > 0) {
      failures.push_back(scenario_name + ": trial " + std::to_string(r.index) + " emitted " +
                         std::to_string(r.safety_violations) + " unsafe commands");
    }
    success += r.arrived && !r.collided ? 1 : 0;
  }
  if (!automatic.empty() && success < min_success * static_cast<double>(automatic.size())) {
    failures.push_back(scenario_name + ": arrival rate " + std::to_string(success) + "/" +
                       std::to_string(automatic.size()) + " below threshold");
  }
  return failures;
}

}  // namespace telepilot
