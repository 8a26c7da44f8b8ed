#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "telepilot/camgeom.hpp"
#include "telepilot/kinchain.hpp"
#include "telepilot/reactnav.hpp"
#include "telepilot/simworld.hpp"

namespace telepilot {

// ---- Wire protocol -------------------------------------------------------
//
// Client -> server, JSON text messages with a "type" discriminator:
//   {"type":"goto","u":..,"v":..}   {"type":"velocity","v":..,"w":..}
//   {"type":"stop"}   {"type":"set_camera","tilt":..,"pan":..}
//   {"type":"load_scenario","name":..}
// Server -> client:
//   {"type":"state",...}   {"type":"frame_ready","seq":..}
//   {"type":"error","code":..,"message":..}

struct GotoCommand {
  double u = 0.0;
  double v = 0.0;
};
struct ManualVelocityCommand {
  double v = 0.0;
  double w = 0.0;
};
struct StopCommand {};
struct SetCameraCommand {
  double tilt = 0.0;
  double pan = 0.0;
};
struct LoadScenarioCommand {
  std::string name;
};

using ClientCommand =
    std::variant<GotoCommand, ManualVelocityCommand, StopCommand, SetCameraCommand, LoadScenarioCommand>;

/// Throws Error(InvalidCommand) for malformed JSON, unknown types and
/// missing or non-finite fields.
ClientCommand parse_command(std::string_view text);
std::string serialize(const ClientCommand& command);

struct StateEvent {
  std::uint64_t tick = 0;
  double time = 0.0;
  OdomPose pose;       // odometry estimate
  OdomPose true_pose;  // simulator ground truth
  std::optional<NavGoal> goal;
  NavStatus nav_status = NavStatus::Idle;
  bool collision = false;
  VelocityCmd cmd;
  double camera_tilt = 0.0;
  double camera_pan = 0.0;
  std::uint64_t frame_seq = 0;
  std::string scenario;
};
struct FrameReadyEvent {
  std::uint64_t seq = 0;
};
struct ErrorEvent {
  std::string code;
  std::string message;
};

using ServerEvent = std::variant<StateEvent, FrameReadyEvent, ErrorEvent>;

std::string serialize(const ServerEvent& event);
/// Throws Error(InvalidCommand) on malformed input.
ServerEvent parse_event(std::string_view text);

// ---- Authoritative loop --------------------------------------------------

struct ServiceOptions {
  std::string bind = "127.0.0.1:8080";
  std::string scenario = "open_space";
  std::uint64_t seed = 1;
  std::string web_root;
  CameraModel camera;
  CameraMount mount = CameraMount::webot();
  NavConfig nav;
  RobotShape shape;
  Simulation::Config sim;
  double initial_tilt = -0.5;
  int render_every = 4;
  std::size_t frame_history = 16;
};

struct EncodedFrame {
  std::uint64_t seq = 0;
  std::vector<std::uint8_t> png;
  RenderFrame frame;
};

/// Owns the simulation and navigator. `tick()` must only be called from the
/// owning thread; every other member is safe to call from any thread.
/// Commands are queued and applied at the next tick boundary in arrival
/// order.
class TeleopCore {
 public:
  using Listener = std::function<void(const std::shared_ptr<const std::string>&)>;

  explicit TeleopCore(ServiceOptions options);

  /// Validates and queues a command. goto is converted to a floor point
  /// against the most recently rendered frame; conversion failures are
  /// returned and leave the navigation state untouched.
  std::optional<ErrorEvent> handle_command(const ClientCommand& command);

  void tick();

  int subscribe(Listener listener);
  void unsubscribe(int id);

  StateEvent state() const;
  std::shared_ptr<const EncodedFrame> frame(std::uint64_t seq) const;
  std::shared_ptr<const EncodedFrame> latest_frame() const;
  const ServiceOptions& options() const { return options_; }

 private:
  struct SetGoal {
    NavGoal goal;
  };
  struct LoadWorld {
    ScenarioSpec spec;
  };
  using Pending = std::variant<SetGoal, ManualVelocityCommand, StopCommand, SetCameraCommand, LoadWorld>;

  void load(const ScenarioSpec& spec);
  void render_and_publish();
  void publish(const ServerEvent& event);
  StateEvent make_state(const VelocityCmd& cmd) const;

  ServiceOptions options_;

  // Owner-thread state.
  std::unique_ptr<Simulation> sim_;
  ScenarioSpec spec_;
  Navigator nav_;
  VelocityCmd manual_;
  std::uint64_t tick_ = 0;
  std::uint64_t next_seq_ = 1;

  mutable std::mutex queue_mutex_;
  std::vector<Pending> queue_;

  mutable std::mutex snapshot_mutex_;
  StateEvent state_;
  std::deque<std::shared_ptr<const EncodedFrame>> frames_;

  mutable std::mutex listener_mutex_;
  std::map<int, Listener> listeners_;
  int next_listener_ = 1;
};

// ---- Transport -----------------------------------------------------------

/// HTTP + WebSocket front end:
///   GET /state          JSON state snapshot
///   GET /frame/{seq}    PNG (404 once evicted); /frame/latest
///   GET /...            static files from web_root
///   WebSocket upgrade on any path: command/event channel
class TeleopServer {
 public:
  /// Throws Error(BindFailure).
  TeleopServer(TeleopCore& core, const std::string& host, unsigned short port, std::string web_root);
  ~TeleopServer();
  TeleopServer(const TeleopServer&) = delete;
  TeleopServer& operator=(const TeleopServer&) = delete;

  unsigned short port() const;
  void start(int threads = 1);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Runs the 20 Hz loop and the server until SIGINT/SIGTERM.
int run_service(const ServiceOptions& options);

}  // namespace telepilot
