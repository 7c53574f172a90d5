// Command-line front end: validate scenario files, run seeded episodes,
// sweep controllers x demand scales x seeds, and exercise the built-in
// oracle fixtures.
#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tsc/harness/runner.hpp"
#include "tsc/momdp/tabular_mdp.hpp"
#include "tsc/rl/qlearn.hpp"

namespace {

int cmd_validate(const std::string& path) {
  tsc::harness::ScenarioConfig cfg = tsc::harness::load_scenario(path);
  std::cout << "ok: " << cfg.name << " hash " << tsc::harness::scenario_hash(cfg)
            << "\n";
  return 0;
}

int cmd_run(const std::string& path, long seed_override, std::string out_dir) {
  tsc::harness::ScenarioConfig cfg = tsc::harness::load_scenario(path);
  if (out_dir.empty()) {
    if (const char* env = std::getenv("TSC_OUT_DIR")) out_dir = env;
  }
  if (out_dir.empty()) out_dir = cfg.out_dir;
  std::vector<std::uint64_t> seeds = cfg.seeds;
  if (seed_override >= 0) seeds = {static_cast<std::uint64_t>(seed_override)};
  for (std::uint64_t seed : seeds) {
    std::ostringstream dir;
    dir << out_dir << "/run_s" << seed;
    tsc::harness::RunResult r = tsc::harness::run_episode(cfg, seed, dir.str());
    if (r.failed) {
      std::cerr << "run failed (seed " << seed << "): " << r.error << "\n";
      return 2;
    }
    std::cout << "seed " << seed << ": throughput " << r.episode.throughput;
    if (r.episode.average_travel_time)
      std::cout << ", att " << *r.episode.average_travel_time << " s";
    if (r.episode.average_delay)
      std::cout << ", delay " << *r.episode.average_delay << " s";
    std::cout << ", mean queue " << r.mean_total_queue << " -> " << r.step_csv_path
              << "\n";
  }
  return 0;
}

int cmd_sweep(const std::string& path, const std::vector<std::string>& controllers,
              const std::vector<double>& scales,
              const std::vector<std::uint64_t>& seeds, std::string out_dir,
              unsigned parallel) {
  tsc::harness::ScenarioConfig cfg = tsc::harness::load_scenario(path);
  if (out_dir.empty()) {
    if (const char* env = std::getenv("TSC_OUT_DIR")) out_dir = env;
  }
  if (out_dir.empty()) out_dir = cfg.out_dir;
  tsc::harness::SweepAxes axes;
  axes.controllers = controllers;
  axes.demand_scales = scales.empty() ? std::vector<double>{1.0} : scales;
  axes.seeds = seeds.empty() ? cfg.seeds : seeds;
  tsc::harness::SweepOutcome out = tsc::harness::sweep(cfg, axes, out_dir, parallel);
  std::string manifest = tsc::harness::write_results(out, out_dir);
  int failures = 0;
  for (const auto& r : out.runs)
    if (r.failed) {
      ++failures;
      std::cerr << "failed: " << r.controller_label << " x" << r.demand_scale << " s"
                << r.seed << ": " << r.error << "\n";
    }
  for (const auto& c : out.table) {
    std::cout << c.controller << " x" << c.demand_scale << " (n=" << c.n << "): ";
    if (c.att_mean)
      std::cout << "att " << *c.att_mean << " +- " << (c.att_std ? *c.att_std : 0.0)
                << " s, ";
    std::cout << "throughput " << c.throughput_mean << " +- " << c.throughput_std
              << "\n";
  }
  std::cout << "manifest: " << manifest << "\n";
  return failures == 0 ? 0 : 2;
}

bool report(const char* name, bool ok) {
  std::cout << (ok ? "PASS  " : "FAIL  ") << name << "\n";
  return ok;
}

// Quick self-checks of the built-in oracle fixtures.
int cmd_oracle() {
  bool all = true;

  tsc::momdp::TabularMdp mdp = tsc::momdp::build_intersection_mdp();
  tsc::momdp::ValueIterationResult vi = tsc::momdp::value_iteration(mdp);
  all &= report("value iteration converges on the two-phase fixture",
                vi.iterations > 0 && vi.value.size() == static_cast<std::size_t>(mdp.n_states));

  std::vector<double> v_pi = tsc::momdp::policy_evaluation(mdp, vi.policy);
  double gap = 0;
  for (std::size_t i = 0; i < v_pi.size(); ++i)
    gap = std::max(gap, std::abs(v_pi[i] - vi.value[i]));
  all &= report("greedy policy evaluation matches V* (1e-6)", gap < 1e-6);

  tsc::rl::MdpTrainConfig tc;
  tc.episodes = 1500;
  tc.steps_per_episode = 100;
  tsc::rl::QTable q = tsc::rl::q_learning_train_mdp(mdp, tc);
  double sup = 0;
  for (int s = 0; s < mdp.n_states; ++s)
    sup = std::max(sup, std::abs(q.max_value(std::to_string(s)) -
                                 vi.value[static_cast<std::size_t>(s)]));
  all &= report("Q-learning reaches V* within 0.05 on the fixture", sup < 0.05);

  return all ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"traffic signal control workbench"};
  app.require_subcommand(1);

  std::string scenario, out_dir;
  long seed = -1;
  unsigned parallel = 0;
  std::vector<std::string> controllers;
  std::vector<double> scales;
  std::vector<std::uint64_t> seeds;

  CLI::App* validate = app.add_subcommand("validate", "check a scenario file");
  validate->add_option("scenario", scenario, "scenario JSON file")->required();

  CLI::App* run = app.add_subcommand("run", "run one scenario episode per seed");
  run->add_option("scenario", scenario, "scenario JSON file")->required();
  run->add_option("--seed", seed, "override the scenario's seed list");
  run->add_option("--out", out_dir, "output directory");

  CLI::App* sweep = app.add_subcommand("sweep", "controller/demand/seed sweep");
  sweep->add_option("scenario", scenario, "scenario JSON file")->required();
  sweep->add_option("--controllers", controllers, "controller names")->required();
  sweep->add_option("--demand-scales", scales, "demand multipliers");
  sweep->add_option("--seeds", seeds, "seed list");
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--parallel", parallel, "worker threads (0 = auto)");

  CLI::App* oracle = app.add_subcommand("oracle", "run built-in oracle self-checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(scenario);
    if (run->parsed()) return cmd_run(scenario, seed, out_dir);
    if (sweep->parsed())
      return cmd_sweep(scenario, controllers, scales, seeds, out_dir, parallel);
    if (oracle->parsed()) return cmd_oracle();
  } catch (const tsc::core::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
