#pragma once

#include <string>

#include "json.hpp"

#include "telepilot/camgeom.hpp"
#include "telepilot/kinchain.hpp"
#include "telepilot/reactnav.hpp"
#include "telepilot/simworld.hpp"

namespace telepilot {

// JSON config files. All loaders throw Error(InvalidConfig) on schema
// problems and Error(IoFailure) when the file cannot be read.

/// {"fx","fy","cx","cy","dist":[k1,k2,p1,p2,k3],"width","height"}
CameraModel camera_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CameraModel& model);

/// {"links":[{"a","d","alpha","theta_offset","joint":"fixed"|"revolute"}...],
///  "axis_remap":"y_forward"|"identity", optional "pan_joint","tilt_joint","tilt_sign"}
CameraMount mount_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CameraMount& mount);

NavConfig nav_from_json(const nlohmann::json& j);
nlohmann::json to_json(const NavConfig& config);

/// {"name","segments":[[x1,y1,x2,y2]...],"bounds":[xmin,ymin,xmax,ymax],
///  "start":{"x","y","theta"},"target":{"x","y","heading","length","width"}}
ScenarioSpec scenario_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::string& path);

CameraModel load_camera_config(const std::string& path);
CameraMount load_chain_config(const std::string& path);
NavConfig load_nav_config(const std::string& path);
ScenarioSpec load_scenario_config(const std::string& path);

}  // namespace telepilot
