#include "telepilot/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "telepilot/error.hpp"

namespace telepilot {

using nlohmann::json;

namespace {

double number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw Error(ErrorCode::InvalidConfig, std::string("missing numeric field '") + key + "'");
  }
  const double value = j.at(key).get<double>();
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::InvalidConfig, std::string("non-finite field '") + key + "'");
  }
  return value;
}

double number_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? number(j, key) : fallback;
}

template <typename T>
T guarded(const char* what, T (*fn)(const json&), const json& j) {
  try {
    return fn(j);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string(what) + ": " + e.what());
  }
}

CameraModel camera_impl(const json& j) {
  CameraModel m;
  m.fx = number(j, "fx");
  m.fy = number(j, "fy");
  m.cx = number(j, "cx");
  m.cy = number(j, "cy");
  m.width = j.at("width").get<int>();
  m.height = j.at("height").get<int>();
  if (j.contains("dist")) {
    const auto d = j.at("dist").get<std::vector<double>>();
    if (d.size() != 5) throw Error(ErrorCode::InvalidConfig, "'dist' must be [k1,k2,p1,p2,k3]");
    m.distortion = {d[0], d[1], d[4], d[2], d[3]};
  }
  m.validate();
  return m;
}

CameraMount mount_impl(const json& j) {
  CameraMount mount;
  mount.links.clear();
  for (const json& l : j.at("links")) {
    DhLink link;
    link.a = number(l, "a");
    link.d = number(l, "d");
    link.alpha = number(l, "alpha");
    link.theta_offset = number_or(l, "theta_offset", 0.0);
    const std::string kind = l.value("joint", "fixed");
    if (kind == "revolute") {
      link.joint = JointKind::Revolute;
    } else if (kind == "fixed") {
      link.joint = JointKind::Fixed;
    } else {
      throw Error(ErrorCode::InvalidConfig, "joint must be 'fixed' or 'revolute'");
    }
    if (std::abs(link.alpha) > std::numbers::pi + 1e-12) {
      throw Error(ErrorCode::InvalidConfig, "link twist outside [-pi, pi]");
    }
    mount.links.push_back(link);
  }
  const std::string remap = j.value("axis_remap", "y_forward");
  if (remap == "y_forward" || remap == "paper_eq10") {
    mount.remap = AxisRemap::y_forward();
  } else if (remap == "identity") {
    mount.remap = AxisRemap::identity();
  } else {
    throw Error(ErrorCode::InvalidConfig, "axis_remap must be 'y_forward' or 'identity'");
  }
  mount.pan_joint = j.value("pan_joint", std::size_t{0});
  mount.tilt_joint = j.value("tilt_joint", std::size_t{1});
  mount.tilt_sign = number_or(j, "tilt_sign", -1.0);
  return mount;
}

NavConfig nav_impl(const json& j) {
  NavConfig c;
  c.v_max = number_or(j, "v_max", c.v_max);
  c.w_max = number_or(j, "w_max", c.w_max);
  c.a_max = number_or(j, "a_max", c.a_max);
  c.alpha_max = number_or(j, "alpha_max", c.alpha_max);
  c.lookahead = number_or(j, "lookahead", c.lookahead);
  c.n_alpha = j.value("n_alpha", c.n_alpha);
  c.w_goal = number_or(j, "w_goal", c.w_goal);
  c.w_clear = number_or(j, "w_clear", c.w_clear);
  c.w_free = number_or(j, "w_free", c.w_free);
  c.safety_fraction = number_or(j, "safety_fraction", c.safety_fraction);
  c.slow_threshold = number_or(j, "slow_threshold", c.slow_threshold);
  c.goal_tolerance = number_or(j, "tolerance", c.goal_tolerance);
  c.clearance_margin = number_or(j, "clearance_margin", c.clearance_margin);
  c.clearance_window = j.value("clearance_window", c.clearance_window);
  c.approach_decel = number_or(j, "approach_decel", c.approach_decel);
  c.control_period = number_or(j, "control_period", c.control_period);
  if (c.v_max <= 0 || c.w_max <= 0 || c.a_max <= 0 || c.alpha_max <= 0 || c.lookahead <= 0 || c.n_alpha < 3 ||
      c.goal_tolerance <= 0) {
    throw Error(ErrorCode::InvalidConfig, "navigator limits must be positive");
  }
  return c;
}

ScenarioSpec scenario_impl(const json& j) {
  ScenarioSpec spec;
  spec.name = j.value("name", "custom");
  for (const json& s : j.at("segments")) {
    const auto v = s.get<std::vector<double>>();
    if (v.size() != 4) throw Error(ErrorCode::InvalidConfig, "segment must be [x1,y1,x2,y2]");
    spec.world.obstacles.push_back({{v[0], v[1]}, {v[2], v[3]}});
  }
  const auto b = j.at("bounds").get<std::vector<double>>();
  if (b.size() != 4 || !(b[0] < b[2]) || !(b[1] < b[3])) {
    throw Error(ErrorCode::InvalidConfig, "bounds must be [xmin,ymin,xmax,ymax], non-degenerate");
  }
  spec.world.bounds = {b[0], b[1], b[2], b[3]};
  const json& start = j.at("start");
  spec.start = {number(start, "x"), number(start, "y"), number_or(start, "theta", 0.0)};
  const json& target = j.at("target");
  spec.target.center = {number(target, "x"), number(target, "y")};
  spec.target.heading = number_or(target, "heading", 0.0);
  spec.target.length = number_or(target, "length", 0.6);
  spec.target.width = number_or(target, "width", 1.0);
  for (const Eigen::Vector2d& corner : spec.target.corners()) {
    if (!spec.world.bounds.contains(corner)) {
      throw Error(ErrorCode::InvalidConfig, "target zone extends outside the world bounds");
    }
  }
  return spec;
}

}  // namespace

CameraModel camera_from_json(const json& j) { return guarded("camera config", camera_impl, j); }
CameraMount mount_from_json(const json& j) { return guarded("chain config", mount_impl, j); }
NavConfig nav_from_json(const json& j) { return guarded("nav config", nav_impl, j); }
ScenarioSpec scenario_from_json(const json& j) { return guarded("scenario config", scenario_impl, j); }

json to_json(const CameraModel& m) {
  const Distortion& d = m.distortion;
  return {{"fx", m.fx},       {"fy", m.fy},         {"cx", m.cx},
          {"cy", m.cy},       {"dist", {d.k1, d.k2, d.p1, d.p2, d.k3}},
          {"width", m.width}, {"height", m.height}};
}

json to_json(const CameraMount& mount) {
  json links = json::array();
  for (const DhLink& l : mount.links) {
    links.push_back({{"a", l.a},
                     {"d", l.d},
                     {"alpha", l.alpha},
                     {"theta_offset", l.theta_offset},
                     {"joint", l.joint == JointKind::Revolute ? "revolute" : "fixed"}});
  }
  const bool identity = mount.remap.matrix().isIdentity();
  return {{"links", links},
          {"axis_remap", identity ? "identity" : "y_forward"},
          {"pan_joint", mount.pan_joint},
          {"tilt_joint", mount.tilt_joint},
          {"tilt_sign", mount.tilt_sign}};
}

json to_json(const NavConfig& c) {
  return {{"v_max", c.v_max},
          {"w_max", c.w_max},
          {"a_max", c.a_max},
          {"alpha_max", c.alpha_max},
          {"lookahead", c.lookahead},
          {"n_alpha", c.n_alpha},
          {"w_goal", c.w_goal},
          {"w_clear", c.w_clear},
          {"w_free", c.w_free},
          {"safety_fraction", c.safety_fraction},
          {"slow_threshold", c.slow_threshold},
          {"tolerance", c.goal_tolerance},
          {"clearance_margin", c.clearance_margin},
          {"clearance_window", c.clearance_window},
          {"approach_decel", c.approach_decel},
          {"control_period", c.control_period}};
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, path + ": " + e.what());
  }
}

CameraModel load_camera_config(const std::string& path) { return camera_from_json(read_json_file(path)); }
CameraMount load_chain_config(const std::string& path) { return mount_from_json(read_json_file(path)); }
NavConfig load_nav_config(const std::string& path) { return nav_from_json(read_json_file(path)); }
ScenarioSpec load_scenario_config(const std::string& path) {
  return scenario_from_json(read_json_file(path));
}

}  // namespace telepilot
