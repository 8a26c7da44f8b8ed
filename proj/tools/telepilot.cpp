// telepilot: experiment runner, frame renderer and teleoperation server.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "telepilot/config.hpp"
#include "telepilot/error.hpp"
#include "telepilot/experiment.hpp"
#include "telepilot/teleop.hpp"

namespace fs = std::filesystem;
using namespace telepilot;

namespace {

struct CommonConfigs {
  std::string camera;
  std::string chain;
  std::string nav;
};

void add_config_flags(CLI::App* app, CommonConfigs& c) {
  app->add_option("--camera-config", c.camera, "Camera intrinsics JSON");
  app->add_option("--chain-config", c.chain, "Camera DH chain JSON");
  app->add_option("--nav-config", c.nav, "Navigator JSON");
}

void apply_configs(const CommonConfigs& c, CameraModel& camera, CameraMount& mount, NavConfig& nav) {
  if (!c.camera.empty()) camera = load_camera_config(c.camera);
  if (!c.chain.empty()) mount = load_chain_config(c.chain);
  if (!c.nav.empty()) nav = load_nav_config(c.nav);
}

ScenarioSpec resolve_scenario(const std::string& name_or_path) {
  if (name_or_path.ends_with(".json")) return load_scenario_config(name_or_path);
  return scenario(name_or_path);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
}

int run_experiments(const std::string& which, const std::string& controller, int trials,
                    std::uint64_t seed, const std::string& out_dir, const ExperimentConfig& config) {
  std::vector<ScenarioSpec> specs;
  if (which == "all") {
    for (const std::string& name : scenario_names()) specs.push_back(scenario(name));
  } else {
    specs.push_back(resolve_scenario(which));
  }
  const bool run_auto = controller == "auto" || controller == "both";
  const bool run_manual = controller == "manual" || controller == "both";
  fs::create_directories(out_dir);

  std::vector<std::string> failures;
  for (const ScenarioSpec& spec : specs) {
    const bool heading = reports_heading(spec.name);
    std::vector<TrialResult> automatic, manual;
    if (run_auto) {
      automatic = run_trials(spec, Controller::Auto, trials, seed, config);
      std::ostringstream csv;
      write_trials_csv(csv, automatic, heading);
      write_file(fs::path(out_dir) / (spec.name + "_auto.csv"), csv.str());
      write_console_summary(std::cout, spec.name, Controller::Auto, automatic);
      for (auto& f : check_invariants(spec.name, automatic)) failures.push_back(std::move(f));
    }
    if (run_manual) {
      manual = run_trials(spec, Controller::Manual, trials, seed, config);
      std::ostringstream csv;
      write_trials_csv(csv, manual, heading);
      write_file(fs::path(out_dir) / (spec.name + "_manual.csv"), csv.str());
      write_console_summary(std::cout, spec.name, Controller::Manual, manual);
    }
    if (run_auto && run_manual) {
      const Comparison comparison = summarize(automatic, manual);
      std::ostringstream csv;
      write_comparison_csv(csv, comparison, heading);
      write_file(fs::path(out_dir) / (spec.name + "_comparison.csv"), csv.str());
      std::cout << spec.name << " improvement of auto over manual (mean %): x="
                << comparison.mean.x_pct << " y=" << comparison.mean.y_pct;
      if (heading) std::cout << " f=" << comparison.mean.f_pct;
      std::cout << " t=" << comparison.mean.t_pct << '\n';
    }
  }
  for (const std::string& f : failures) std::cerr << "invariant violated: " << f << '\n';
  return failures.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Click-to-go telepresence robot simulator"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run the headless experiment protocol");
  std::string run_scenario = "all";
  std::string run_controller = "both";
  int trials = 10;
  std::uint64_t seed = 1;
  std::string out_dir = "results";
  CommonConfigs run_cfg;
  run->add_option("--scenario", run_scenario, "open_space | doorway | block | all | <file.json>");
  run->add_option("--controller", run_controller, "auto | manual | both")
      ->check(CLI::IsMember({"auto", "manual", "both"}));
  run->add_option("--trials", trials, "Trials per scenario and controller")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Random seed");
  run->add_option("--out", out_dir, "Output directory for CSV files");
  add_config_flags(run, run_cfg);

  // render
  auto* render = app.add_subcommand("render", "Render the start frame of a scenario to PNG");
  std::string render_scenario = "open_space";
  std::string render_out = "frame.png";
  double tilt = -0.5, pan = 0.0;
  CommonConfigs render_cfg;
  render->add_option("--scenario", render_scenario, "Scenario name or JSON file");
  render->add_option("--out", render_out, "PNG path");
  render->add_option("--tilt", tilt, "Camera tilt, rad (negative looks down)");
  render->add_option("--pan", pan, "Camera pan, rad");
  add_config_flags(render, render_cfg);

  // serve
  auto* serve = app.add_subcommand("serve", "Run the teleoperation service");
  ServiceOptions service;
  CommonConfigs serve_cfg;
  serve->add_option("--bind", service.bind, "host:port");
  serve->add_option("--scenario", service.scenario, "Scenario name or JSON file");
  serve->add_option("--seed", service.seed, "Random seed");
  serve->add_option("--web-root", service.web_root, "Directory with the browser console");
  add_config_flags(serve, serve_cfg);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ExperimentConfig config;
      apply_configs(run_cfg, config.camera, config.mount, config.nav);
      return run_experiments(run_scenario, run_controller, trials, seed, out_dir, config);
    }
    if (*render) {
      CameraModel camera;
      CameraMount mount = CameraMount::webot();
      NavConfig nav;
      apply_configs(render_cfg, camera, mount, nav);
      const ScenarioSpec spec = resolve_scenario(render_scenario);
      SimRobot robot;
      robot.true_pose = spec.start;
      robot.camera_tilt = tilt;
      robot.camera_pan = pan;
      RenderOptions options;
      options.target = spec.target;
      write_png(render_out, render_camera(spec.world, robot, camera, mount, options));
      std::cout << "wrote " << render_out << '\n';
      return 0;
    }
    if (*serve) {
      apply_configs(serve_cfg, service.camera, service.mount, service.nav);
      return run_service(service);
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
