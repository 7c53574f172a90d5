#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tsc/harness/scenario.hpp"
#include "tsc/metrics/metrics.hpp"

namespace tsc::harness {

// Per-intersection decision maker invoked once per simulation step. Fixed
// plans are installed at reset and drive the signal directly; their decide()
// is ignored by the simulator.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual void reset(const core::Simulator& sim, core::SimState& s, int intersection,
                     std::uint64_t seed) {}
  virtual core::SignalAction decide(const core::Simulator& sim, const core::SimState& s,
                                    const core::StepEvents& last_events, long t) = 0;
};

// Instantiates a registered controller by name. Known names: fixed_time,
// webster, actuated, max_pressure, max_queue_first, q_learning, q_policy,
// rho. Throws ConfigError for unknown names or bad parameter blocks.
std::unique_ptr<Controller> make_controller(const std::string& name,
                                            const nlohmann::json& params,
                                            const ScenarioConfig& cfg);

std::vector<std::string> registered_controllers();

struct RunResult {
  std::string scenario_hash;
  std::string controller_label;
  double demand_scale = 1.0;
  std::uint64_t seed = 0;
  metrics::EpisodeMetrics episode;
  double mean_total_queue = 0;
  std::string step_csv_path;
  std::string episode_json_path;
  double wall_clock_s = 0;
  bool failed = false;
  std::string error;
};

// Runs one seeded episode to the horizon, writing per-step metrics CSV and
// an episode-summary JSON into out_dir. Deterministic per (cfg, seed).
RunResult run_episode(const ScenarioConfig& cfg, std::uint64_t seed,
                      const std::string& out_dir);

struct SweepAxes {
  std::vector<std::string> controllers;   // controller name applied to every intersection
  std::vector<double> demand_scales;
  std::vector<std::uint64_t> seeds;
};

struct SweepCell {
  std::string controller;
  double demand_scale = 1.0;
  int n = 0;
  std::optional<double> att_mean, att_std;
  std::optional<double> ad_mean, ad_std;
  double throughput_mean = 0, throughput_std = 0;
};

struct SweepOutcome {
  std::vector<RunResult> runs;
  std::vector<SweepCell> table;
};

// Cartesian product of the axes, run with up to `parallelism` worker threads
// (0 = hardware concurrency). Individual run failures are recorded and the
// sweep continues.
SweepOutcome sweep(const ScenarioConfig& cfg, const SweepAxes& axes,
                   const std::string& out_dir, unsigned parallelism = 0);

// Writes the comparison table and a manifest listing every produced file
// with its digest; returns the manifest path.
std::string write_results(const SweepOutcome& outcome, const std::string& out_dir);

}  // namespace tsc::harness
