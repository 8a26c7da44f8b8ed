#include "telepilot/teleop.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "telepilot/config.hpp"
#include "telepilot/error.hpp"

namespace telepilot {

using nlohmann::json;

namespace {

double field(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw Error(ErrorCode::InvalidCommand, std::string("missing numeric field '") + key + "'");
  }
  const double value = j.at(key).get<double>();
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::InvalidCommand, std::string("non-finite field '") + key + "'");
  }
  return value;
}

json parse_object(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::InvalidCommand, "message is not a JSON object");
  }
  if (!j.contains("type") || !j.at("type").is_string()) {
    throw Error(ErrorCode::InvalidCommand, "message has no string 'type'");
  }
  return j;
}

json pose_json(const OdomPose& p) { return {{"x", p.x}, {"y", p.y}, {"theta", p.theta}}; }

OdomPose pose_from(const json& j) { return {field(j, "x"), field(j, "y"), field(j, "theta")}; }

NavStatus status_from(const std::string& s) {
  for (NavStatus st : {NavStatus::Idle, NavStatus::Navigating, NavStatus::Arrived, NavStatus::Blocked}) {
    if (to_string(st) == s) return st;
  }
  throw Error(ErrorCode::InvalidCommand, "unknown nav_status '" + s + "'");
}

ErrorEvent error_event(const Error& e) { return {std::string(to_string(e.code())), e.what()}; }

}  // namespace

ClientCommand parse_command(std::string_view text) {
  const json j = parse_object(text);
  const std::string type = j.at("type").get<std::string>();
  if (type == "goto") return GotoCommand{field(j, "u"), field(j, "v")};
  if (type == "velocity") return ManualVelocityCommand{field(j, "v"), field(j, "w")};
  if (type == "stop") return StopCommand{};
  if (type == "set_camera") return SetCameraCommand{field(j, "tilt"), field(j, "pan")};
  if (type == "load_scenario") {
    if (!j.contains("name") || !j.at("name").is_string()) {
      throw Error(ErrorCode::InvalidCommand, "load_scenario needs a string 'name'");
    }
    return LoadScenarioCommand{j.at("name").get<std::string>()};
  }
  throw Error(ErrorCode::InvalidCommand, "unknown command type '" + type + "'");
}

std::string serialize(const ClientCommand& command) {
  struct Visitor {
    json operator()(const GotoCommand& c) const { return {{"type", "goto"}, {"u", c.u}, {"v", c.v}}; }
    json operator()(const ManualVelocityCommand& c) const {
      return {{"type", "velocity"}, {"v", c.v}, {"w", c.w}};
    }
    json operator()(const StopCommand&) const { return {{"type", "stop"}}; }
    json operator()(const SetCameraCommand& c) const {
      return {{"type", "set_camera"}, {"tilt", c.tilt}, {"pan", c.pan}};
    }
    json operator()(const LoadScenarioCommand& c) const {
      return {{"type", "load_scenario"}, {"name", c.name}};
    }
  };
  return std::visit(Visitor{}, command).dump();
}

std::string serialize(const ServerEvent& event) {
  struct Visitor {
    json operator()(const StateEvent& s) const {
      json goal = nullptr;
      if (s.goal) goal = {{"x", s.goal->x}, {"y", s.goal->y}, {"tolerance", s.goal->tolerance}};
      return {{"type", "state"},
              {"tick", s.tick},
              {"time", s.time},
              {"pose", pose_json(s.pose)},
              {"true_pose", pose_json(s.true_pose)},
              {"goal", goal},
              {"nav_status", std::string(to_string(s.nav_status))},
              {"collision", s.collision},
              {"cmd", {{"v", s.cmd.v}, {"w", s.cmd.w}}},
              {"camera", {{"tilt", s.camera_tilt}, {"pan", s.camera_pan}}},
              {"frame_seq", s.frame_seq},
              {"scenario", s.scenario}};
    }
    json operator()(const FrameReadyEvent& f) const { return {{"type", "frame_ready"}, {"seq", f.seq}}; }
    json operator()(const ErrorEvent& e) const {
      return {{"type", "error"}, {"code", e.code}, {"message", e.message}};
    }
  };
  return std::visit(Visitor{}, event).dump();
}

ServerEvent parse_event(std::string_view text) {
  const json j = parse_object(text);
  const std::string type = j.at("type").get<std::string>();
  try {
    if (type == "frame_ready") return FrameReadyEvent{j.at("seq").get<std::uint64_t>()};
    if (type == "error") return ErrorEvent{j.at("code").get<std::string>(), j.at("message").get<std::string>()};
    if (type == "state") {
      StateEvent s;
      s.tick = j.at("tick").get<std::uint64_t>();
      s.time = field(j, "time");
      s.pose = pose_from(j.at("pose"));
      s.true_pose = pose_from(j.at("true_pose"));
      if (!j.at("goal").is_null()) {
        const json& g = j.at("goal");
        s.goal = NavGoal{field(g, "x"), field(g, "y"), field(g, "tolerance")};
      }
      s.nav_status = status_from(j.at("nav_status").get<std::string>());
      s.collision = j.at("collision").get<bool>();
      s.cmd = {field(j.at("cmd"), "v"), field(j.at("cmd"), "w")};
      s.camera_tilt = field(j.at("camera"), "tilt");
      s.camera_pan = field(j.at("camera"), "pan");
      s.frame_seq = j.at("frame_seq").get<std::uint64_t>();
      s.scenario = j.at("scenario").get<std::string>();
      return s;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidCommand, std::string("malformed ") + type + " event: " + e.what());
  }
  throw Error(ErrorCode::InvalidCommand, "unknown event type '" + type + "'");
}

TeleopCore::TeleopCore(ServiceOptions options) : options_(std::move(options)) {
  options_.camera.validate();
  const ScenarioSpec spec = options_.scenario.ends_with(".json")
                                ? load_scenario_config(options_.scenario)
                                : scenario(options_.scenario);
  load(spec);
}

void TeleopCore::load(const ScenarioSpec& spec) {
  spec_ = spec;
  SimRobot robot;
  robot.true_pose = spec.start;
  robot.shape = options_.shape;
  robot.camera_tilt = options_.initial_tilt;
  sim_ = std::make_unique<Simulation>(spec.world, robot, options_.sim, options_.seed);
  nav_ = Navigator(options_.nav, options_.shape);
  manual_ = {};
  render_and_publish();
  const StateEvent state = make_state({});
  std::lock_guard lock(snapshot_mutex_);
  state_ = state;
}

std::optional<ErrorEvent> TeleopCore::handle_command(const ClientCommand& command) {
  try {
    Pending pending;
    if (const auto* go = std::get_if<GotoCommand>(&command)) {
      const std::shared_ptr<const EncodedFrame> shown = latest_frame();
      const RenderFrame& frame = shown->frame;
      // Geometry of the frame the operator clicked, not the current one.
      const GroundPoint ground = pixel_to_ground(options_.camera, options_.mount.links, frame.joints,
                                                 options_.mount.remap, {go->u, go->v});
      const OdomPose goal = compose(frame.odom_pose, {ground.x, ground.y, 0.0});
      pending = SetGoal{{goal.x, goal.y, options_.nav.goal_tolerance}};
    } else if (const auto* vel = std::get_if<ManualVelocityCommand>(&command)) {
      pending = ManualVelocityCommand{std::clamp(vel->v, -options_.nav.v_max, options_.nav.v_max),
                                      std::clamp(vel->w, -options_.nav.w_max, options_.nav.w_max)};
    } else if (std::holds_alternative<StopCommand>(command)) {
      pending = StopCommand{};
    } else if (const auto* cam = std::get_if<SetCameraCommand>(&command)) {
      pending = *cam;
    } else if (const auto* load = std::get_if<LoadScenarioCommand>(&command)) {
      pending = LoadWorld{load->name.ends_with(".json") ? load_scenario_config(load->name)
                                                        : scenario(load->name)};
    }
    std::lock_guard lock(queue_mutex_);
    queue_.push_back(std::move(pending));
  } catch (const Error& e) {
    return error_event(e);
  }
  return std::nullopt;
}

void TeleopCore::tick() {
  std::vector<Pending> commands;
  {
    std::lock_guard lock(queue_mutex_);
    commands.swap(queue_);
  }
  // Last command wins: a manual command cancels navigation and a goal
  // cancels manual driving.
  for (Pending& pending : commands) {
    if (auto* goal = std::get_if<SetGoal>(&pending)) {
      nav_.set_goal(goal->goal);
      manual_ = {};
    } else if (auto* vel = std::get_if<ManualVelocityCommand>(&pending)) {
      nav_.clear_goal();
      manual_ = {vel->v, vel->w};
    } else if (std::holds_alternative<StopCommand>(pending)) {
      nav_.clear_goal();
      manual_ = {};
    } else if (auto* cam = std::get_if<SetCameraCommand>(&pending)) {
      sim_->robot().camera_tilt = cam->tilt;
      sim_->robot().camera_pan = cam->pan;
    } else if (auto* world = std::get_if<LoadWorld>(&pending)) {
      load(world->spec);
    }
  }

  VelocityCmd cmd = manual_;
  if (nav_.goal()) cmd = nav_.step(sim_->odom(), sim_->scan(), {sim_->robot().v, sim_->robot().w}).cmd;
  sim_->advance(cmd);
  ++tick_;

  if (options_.render_every > 0 && tick_ % static_cast<std::uint64_t>(options_.render_every) == 0) {
    render_and_publish();
  }
  const StateEvent state = make_state(cmd);
  {
    std::lock_guard lock(snapshot_mutex_);
    state_ = state;
  }
  publish(state);
}

void TeleopCore::render_and_publish() {
  RenderOptions render;
  render.target = spec_.target;
  auto encoded = std::make_shared<EncodedFrame>();
  encoded->frame = render_camera(sim_->world(), sim_->robot(), options_.camera, options_.mount, render);
  encoded->frame.odom_pose = sim_->odom();
  encoded->seq = next_seq_++;
  encoded->frame.seq = encoded->seq;
  encoded->png = encode_png(encoded->frame);
  {
    std::lock_guard lock(snapshot_mutex_);
    frames_.push_back(encoded);
    while (frames_.size() > std::max<std::size_t>(1, options_.frame_history)) frames_.pop_front();
  }
  publish(FrameReadyEvent{encoded->seq});
}

StateEvent TeleopCore::make_state(const VelocityCmd& cmd) const {
  StateEvent s;
  s.tick = tick_;
  s.time = sim_->time();
  s.pose = sim_->odom();
  s.true_pose = sim_->robot().true_pose;
  s.goal = nav_.goal();
  s.nav_status = nav_.status();
  s.collision = sim_->robot().collided;
  s.cmd = cmd;
  s.camera_tilt = sim_->robot().camera_tilt;
  s.camera_pan = sim_->robot().camera_pan;
  s.frame_seq = next_seq_ - 1;
  s.scenario = spec_.name;
  return s;
}

void TeleopCore::publish(const ServerEvent& event) {
  auto message = std::make_shared<const std::string>(serialize(event));
  std::vector<Listener> targets;
  {
    std::lock_guard lock(listener_mutex_);
    for (const auto& [id, listener] : listeners_) targets.push_back(listener);
  }
  for (const Listener& listener : targets) listener(message);
}

int TeleopCore::subscribe(Listener listener) {
  std::lock_guard lock(listener_mutex_);
  const int id = next_listener_++;
  listeners_.emplace(id, std::move(listener));
  return id;
}

void TeleopCore::unsubscribe(int id) {
  std::lock_guard lock(listener_mutex_);
  listeners_.erase(id);
}

StateEvent TeleopCore::state() const {
  std::lock_guard lock(snapshot_mutex_);
  return state_;
}

std::shared_ptr<const EncodedFrame> TeleopCore::frame(std::uint64_t seq) const {
  std::lock_guard lock(snapshot_mutex_);
  for (const auto& f : frames_) {
    if (f->seq == seq) return f;
  }
  return nullptr;
}

std::shared_ptr<const EncodedFrame> TeleopCore::latest_frame() const {
  std::lock_guard lock(snapshot_mutex_);
  return frames_.back();
}

}  // namespace telepilot
