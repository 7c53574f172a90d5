#include "tsc/harness/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "tsc/classic/classic.hpp"
#include "tsc/rho/rho.hpp"
#include "tsc/rl/qlearn.hpp"

namespace tsc::harness {

namespace fs = std::filesystem;
using core::ConfigError;
using nlohmann::json;

namespace {

// --- controllers ---

class ExtendController : public Controller {
 public:
  core::SignalAction decide(const core::Simulator&, const core::SimState&,
                            const core::StepEvents&, long) override {
    return core::SignalAction::extend();
  }
};

// Installs a cycle plan built from explicit splits.
class FixedTimeController : public Controller {
 public:
  explicit FixedTimeController(json params) : params_(std::move(params)) {}

  void reset(const core::Simulator& sim, core::SimState& s, int intersection,
             std::uint64_t) override {
    const core::PhasingScheme& scheme = sim.network().scheme_for(intersection);
    core::CyclePlan plan;
    plan.phases = scheme.phase_order;
    plan.yellow_s = params_.value("yellow_s", scheme.yellow_s);
    plan.all_red_s = params_.value("all_red_s", scheme.all_red_s);
    if (params_.contains("splits_s"))
      plan.splits_s = params_.at("splits_s").get<std::vector<double>>();
    else
      plan.splits_s.assign(plan.phases.size(), params_.value("split_s", 20.0));
    if (plan.splits_s.size() != plan.phases.size())
      throw ConfigError("fixed_time: splits_s size must match the phase order");
    plan.offset_s = params_.value("offset_s", 0.0);
    for (double g : plan.splits_s) plan.cycle_s += g + plan.change_interval();
    plan.validate();
    sim.set_plan(s, intersection, std::move(plan));
  }

  core::SignalAction decide(const core::Simulator&, const core::SimState&,
                            const core::StepEvents&, long) override {
    return core::SignalAction::extend();  // the installed plan drives the signal
  }

 private:
  json params_;
};

class WebsterController : public Controller {
 public:
  explicit WebsterController(json params) : params_(std::move(params)) {}

  void reset(const core::Simulator& sim, core::SimState& s, int intersection,
             std::uint64_t) override {
    const core::PhasingScheme& scheme = sim.network().scheme_for(intersection);
    classic::WebsterInput in;
    in.phases = scheme.phase_order;
    in.critical_flows = params_.at("critical_flows").get<std::vector<double>>();
    if (params_.contains("saturation_flows"))
      in.saturation_flows = params_.at("saturation_flows").get<std::vector<double>>();
    else
      in.saturation_flows.assign(in.phases.size(), 1800.0);
    in.yellow_s = scheme.yellow_s;
    in.all_red_s = scheme.all_red_s;
    in.lost_time_s = params_.value(
        "lost_time_s",
        static_cast<double>(in.phases.size()) * (scheme.yellow_s + scheme.all_red_s));
    in.cycle_s = params_.value("cycle_s", 0.0);
    in.offset_s = params_.value("offset_s", 0.0);
    sim.set_plan(s, intersection, classic::webster_plan(in));
  }

  core::SignalAction decide(const core::Simulator&, const core::SimState&,
                            const core::StepEvents&, long) override {
    return core::SignalAction::extend();
  }

 private:
  json params_;
};

class ActuatedController : public Controller {
 public:
  explicit ActuatedController(json params) : params_(std::move(params)) {}

  void reset(const core::Simulator& sim, core::SimState&, int intersection,
             std::uint64_t) override {
    intersection_ = intersection;
    const core::PhasingScheme& scheme = sim.network().scheme_for(intersection);
    cfg_.gap_time_s = params_.value("gap_s", 3.0);
    cfg_.min_green_s = params_.value("min_green_s", scheme.min_green_s);
    cfg_.max_green_s = params_.value("max_green_s", scheme.max_green_s);
    last_arrival_t_ = 0;
  }

  core::SignalAction decide(const core::Simulator& sim, const core::SimState& s,
                            const core::StepEvents& ev, long t) override {
    const core::NetworkSpec& net = sim.network();
    const core::SignalState& sig = s.signals[static_cast<std::size_t>(intersection_)];
    if (sig.mode != core::InterlockMode::Green || sig.phase < 0)
      return core::SignalAction::extend();
    // arrivals onto the served approaches: boundary detector counts plus
    // upstream discharges feeding the green phase's incoming links
    bool arrival = false;
    for (int mi : net.phase_movements[static_cast<std::size_t>(sig.phase)]) {
      const std::string& in_link = net.movement(mi).in_link;
      auto a = ev.arrivals.find(in_link);
      if (a != ev.arrivals.end() && a->second > 0) arrival = true;
      for (const auto& [mid, n] : ev.discharges)
        if (n > 0 && net.movement(net.movement_index.at(mid)).out_link == in_link)
          arrival = true;
    }
    if (arrival) last_arrival_t_ = t;
    double since = static_cast<double>(t - last_arrival_t_) * sim.config().tau;
    return classic::actuated_decide(since, sig.elapsed_s, cfg_);
  }

 private:
  json params_;
  classic::ActuatedConfig cfg_;
  int intersection_ = 0;
  long last_arrival_t_ = 0;
};

class MaxPressureController : public Controller {
 public:
  explicit MaxPressureController(json params)
      : count_transit_(params.value("count_transit", false)) {}

  void reset(const core::Simulator&, core::SimState&, int intersection,
             std::uint64_t) override {
    intersection_ = intersection;
  }

  core::SignalAction decide(const core::Simulator& sim, const core::SimState& s,
                            const core::StepEvents&, long) override {
    const core::NetworkSpec& net = sim.network();
    const core::PhasingScheme& scheme = net.scheme_for(intersection_);
    std::vector<classic::PhaseQueues> phases;
    for (const std::string& pid : scheme.phase_order) {
      classic::PhaseQueues pq;
      pq.phase = pid;
      int pi = net.phase_index.at(pid);
      for (int mi : net.phase_movements[static_cast<std::size_t>(pi)]) {
        const core::Movement& m = net.movement(mi);
        int li = net.link_index.at(m.in_link);
        // position of the movement within its link's queue array
        const auto& slots = net.movements_of_link[static_cast<std::size_t>(li)];
        std::size_t slot =
            static_cast<std::size_t>(std::find(slots.begin(), slots.end(), mi) -
                                     slots.begin());
        double up = s.links[static_cast<std::size_t>(li)].queue_counts[slot];
        double down = 0;
        if (!m.is_sink()) {
          const auto& dl = s.links[static_cast<std::size_t>(net.link_index.at(m.out_link))];
          down = count_transit_ ? dl.occupancy() : dl.queue_total();
        }
        pq.movements.emplace_back(up, down);
      }
      phases.push_back(std::move(pq));
    }
    return classic::max_pressure_decide(phases);
  }

 private:
  bool count_transit_;
  int intersection_ = 0;
};

class MaxQueueFirstController : public Controller {
 public:
  explicit MaxQueueFirstController(json) {}

  void reset(const core::Simulator&, core::SimState&, int intersection,
             std::uint64_t) override {
    intersection_ = intersection;
  }

  core::SignalAction decide(const core::Simulator& sim, const core::SimState& s,
                            const core::StepEvents&, long) override {
    const core::NetworkSpec& net = sim.network();
    const core::PhasingScheme& scheme = net.scheme_for(intersection_);
    std::vector<double> totals;
    for (const std::string& pid : scheme.phase_order) {
      int pi = net.phase_index.at(pid);
      double q = 0;
      for (int mi : net.phase_movements[static_cast<std::size_t>(pi)]) {
        const core::Movement& m = net.movement(mi);
        int li = net.link_index.at(m.in_link);
        const auto& slots = net.movements_of_link[static_cast<std::size_t>(li)];
        std::size_t slot =
            static_cast<std::size_t>(std::find(slots.begin(), slots.end(), mi) -
                                     slots.begin());
        q += s.links[static_cast<std::size_t>(li)].queue_counts[slot];
      }
      totals.push_back(q);
    }
    return classic::max_queue_first_decide(scheme.phase_order, totals);
  }

 private:
  int intersection_ = 0;
};

// Greedy policy read from a Q-table checkpoint, or trained in place when the
// params carry an episode budget.
class QPolicyController : public Controller {
 public:
  QPolicyController(json params, const ScenarioConfig& cfg, bool train)
      : params_(std::move(params)), scenario_(&cfg), train_(train) {}

  void reset(const core::Simulator& sim, core::SimState&, int intersection,
             std::uint64_t seed) override {
    intersection_ = intersection;
    level_ = params_.contains("level")
                 ? momdp::design_level_from_string(params_.at("level").get<std::string>())
                 : scenario_->level;
    bin_width_ = params_.value("bin_width", scenario_->bin_width);
    if (train_) {
      rl::QTrainConfig tc;
      tc.episodes = params_.value("episodes", 50L);
      tc.level = level_;
      tc.bin_width = bin_width_;
      tc.reward = rl::reward_mode_from_string(params_.value("reward", "queue"));
      tc.gamma = params_.value("gamma", 0.95);
      tc.seed = params_.value("train_seed", seed);
      rl::QTrainResult r = rl::q_learning_train(sim, tc);
      table_ = std::move(r.tables[static_cast<std::size_t>(intersection)]);
    } else {
      std::ifstream in(params_.at("checkpoint").get<std::string>());
      if (!in) throw ConfigError("q_policy: cannot open checkpoint");
      table_ = rl::load_qtable(in);
    }
  }

  core::SignalAction decide(const core::Simulator& sim, const core::SimState& s,
                            const core::StepEvents&, long) override {
    momdp::BoundaryConfig bc{
        sim.network().intersections[static_cast<std::size_t>(intersection_)], level_, 1};
    std::string key = rl::state_key(momdp::observe(s, sim.network(), bc), bin_width_);
    return table_.greedy_action(key) == 0 ? core::SignalAction::extend()
                                          : core::SignalAction::change();
  }

 private:
  json params_;
  const ScenarioConfig* scenario_;
  bool train_;
  int intersection_ = 0;
  momdp::DesignLevel level_ = momdp::DesignLevel::L1;
  double bin_width_ = 5.0;
  rl::QTable table_;
};

class RhoController : public Controller {
 public:
  RhoController(json params, const ScenarioConfig& cfg)
      : params_(std::move(params)), scenario_(&cfg) {}

  void reset(const core::Simulator& sim, core::SimState&, int intersection,
             std::uint64_t) override {
    cfg_.intersection = intersection;
    cfg_.horizon_steps = params_.value("horizon", 8);
    cfg_.forecast = rho::forecast_from_string(params_.value("forecast", "oracle"));
    cfg_.objective = rho::objective_from_string(params_.value("objective", "queue"));
    cfg_.stride = params_.value("stride", 1);

    core::SimConfig mc = sim.config();
    mc.fractional = true;
    model_ = std::make_unique<core::Simulator>(sim.network(), mc,
                                               scaled_demand(scenario_->demand,
                                                             scenario_->demand_scale));
    beliefs_.clear();
    if (cfg_.forecast == rho::Forecast::Belief)
      for (const auto& e : model_->demand().entries())
        if (e.is_regime) {
          momdp::DemandBelief b;
          b.rates = e.regime.rates;
          b.transition = e.regime.transition;
          b.tau = sim.config().tau;
          b.probabilities.assign(b.rates.size(), 1.0 / static_cast<double>(b.rates.size()));
          beliefs_.emplace(e.link, std::move(b));
        }
  }

  core::SignalAction decide(const core::Simulator& sim, const core::SimState& s,
                            const core::StepEvents&, long t) override {
    for (auto& [link, b] : beliefs_) {
      auto it = s.last_arrivals.find(link);
      b = momdp::belief_update(b, it == s.last_arrivals.end() ? 0 : it->second);
    }
    if (t % cfg_.stride != 0 && !plan_.empty()) {
      core::SignalAction a = plan_.front();
      plan_.erase(plan_.begin());
      return a;
    }
    // count-based shadow of the live state: the fractional internal model
    // neither moves nor scores per-vehicle records
    core::SimState shadow = s;
    shadow.vehicles.clear();
    for (auto& l : shadow.links) {
      for (auto& q : l.queues) q.clear();
      l.backlog_ids.clear();
      for (auto& b : l.transit) b.vehicle_ids.clear();
    }
    rho::DecisionTrace trace;
    core::SignalAction a =
        rho::mpc_step(*model_, shadow, t, cfg_, s.last_arrivals,
                      beliefs_.empty() ? nullptr : &beliefs_, &trace);
    plan_.assign(trace.plan.begin() + 1, trace.plan.end());
    return a;
  }

 private:
  json params_;
  const ScenarioConfig* scenario_;
  rho::RhoConfig cfg_;
  std::unique_ptr<core::Simulator> model_;
  std::map<std::string, momdp::DemandBelief> beliefs_;
  std::vector<core::SignalAction> plan_;
};

std::string csv_num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::unique_ptr<Controller> make_controller(const std::string& name, const json& params,
                                            const ScenarioConfig& cfg) {
  try {
    if (name == "extend" || name == "none") return std::make_unique<ExtendController>();
    if (name == "fixed_time") return std::make_unique<FixedTimeController>(params);
    if (name == "webster") return std::make_unique<WebsterController>(params);
    if (name == "actuated") return std::make_unique<ActuatedController>(params);
    if (name == "max_pressure") return std::make_unique<MaxPressureController>(params);
    if (name == "max_queue_first")
      return std::make_unique<MaxQueueFirstController>(params);
    if (name == "q_learning") return std::make_unique<QPolicyController>(params, cfg, true);
    if (name == "q_policy") return std::make_unique<QPolicyController>(params, cfg, false);
    if (name == "rho") return std::make_unique<RhoController>(params, cfg);
  } catch (const json::exception& e) {
    throw ConfigError("controller " + name + ": bad params: " + e.what());
  }
  throw ConfigError("unknown controller: " + name);
}

std::vector<std::string> registered_controllers() {
  return {"extend",         "fixed_time", "webster",    "actuated", "max_pressure",
          "max_queue_first", "q_learning", "q_policy",  "rho"};
}

RunResult run_episode(const ScenarioConfig& cfg, std::uint64_t seed,
                      const std::string& out_dir) {
  auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  fs::create_directories(out_dir);

  core::Simulator sim(cfg.network, cfg.sim,
                      scaled_demand(cfg.demand, cfg.demand_scale));
  core::SimState s = sim.initial_state();
  s.rng = Rng::derive(seed, "sim");

  std::size_t n_ints = cfg.network.intersections.size();
  std::vector<std::unique_ptr<Controller>> ctrls(n_ints);
  std::string label = "extend";
  for (std::size_t i = 0; i < n_ints; ++i) {
    const std::string& id = cfg.network.intersections[i];
    std::string name = "extend";
    json params = json::object();
    for (const auto& a : cfg.controllers)
      if (a.intersection == id) {
        name = a.name;
        params = a.params;
      }
    if (i == 0) label = name;
    ctrls[i] = make_controller(name, params, cfg);
    ctrls[i]->reset(sim, s, static_cast<int>(i), seed);
  }

  RunResult res;
  res.scenario_hash = scenario_hash(cfg);
  res.controller_label = label;
  res.demand_scale = cfg.demand_scale;
  res.seed = seed;
  res.step_csv_path = (fs::path(out_dir) / "steps.csv").string();
  res.episode_json_path = (fs::path(out_dir) / "episode.json").string();

  std::ofstream csv(res.step_csv_path);
  csv << "t,intersection,queue,actual_delay,stops,cum_delay,vehicle_count,"
         "cum_travel,delay_diff,cost\n";

  std::vector<double> prev_cd(n_ints, 0.0);
  core::StepEvents last_events;
  double queue_sum = 0;
  try {
    for (long t = 0; t < cfg.sim.horizon; ++t) {
      std::vector<core::SignalAction> actions(n_ints);
      for (std::size_t i = 0; i < n_ints; ++i)
        actions[i] = ctrls[i]->decide(sim, s, last_events, t);
      last_events = sim.step(s, actions);
      double step_queue = 0;
      for (std::size_t i = 0; i < n_ints; ++i) {
        metrics::StepMetrics m = metrics::intersection_step_metrics(
            s, cfg.network, static_cast<int>(i), prev_cd[i], {}, cfg.sim.tau);
        prev_cd[i] = m.cumulative_delay;
        step_queue += m.queue_length;
        csv << t << ',' << cfg.network.intersections[i] << ',' << csv_num(m.queue_length)
            << ',' << csv_num(m.actual_delay) << ',' << csv_num(m.stops) << ','
            << csv_num(m.cumulative_delay) << ',' << csv_num(m.vehicle_count) << ','
            << csv_num(m.cumulative_travel) << ',' << csv_num(m.delay_difference) << ','
            << csv_num(m.cost) << '\n';
      }
      queue_sum += step_queue;
    }
  } catch (const std::exception& e) {
    csv.flush();
    res.failed = true;
    res.error = e.what();
  }
  csv.close();

  res.episode = metrics::network_episode_metrics(s.vehicles);
  res.mean_total_queue =
      cfg.sim.horizon > 0 ? queue_sum / static_cast<double>(cfg.sim.horizon) : 0.0;

  json ej;
  ej["schema_version"] = kSchemaVersion;
  ej["scenario_hash"] = res.scenario_hash;
  ej["controller"] = label;
  ej["demand_scale"] = cfg.demand_scale;
  ej["seed"] = seed;
  ej["throughput"] = res.episode.throughput;
  if (res.episode.average_travel_time) ej["att"] = *res.episode.average_travel_time;
  if (res.episode.average_delay) ej["ad"] = *res.episode.average_delay;
  ej["mean_total_queue"] = res.mean_total_queue;
  ej["entered"] = s.entered;
  ej["exited"] = s.exited;
  if (res.failed) ej["error"] = res.error;
  std::ofstream(res.episode_json_path) << ej.dump(2) << "\n";

  res.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

namespace {

void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
  mean = 0;
  sd = 0;
  if (xs.empty()) return;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return;
  for (double x : xs) sd += (x - mean) * (x - mean);
  sd = std::sqrt(sd / static_cast<double>(xs.size() - 1));
}

}  // namespace

SweepOutcome sweep(const ScenarioConfig& cfg, const SweepAxes& axes,
                   const std::string& out_dir, unsigned parallelism) {
  if (axes.controllers.empty() || axes.demand_scales.empty() || axes.seeds.empty())
    throw ConfigError("sweep: every axis must be nonempty");

  struct Job {
    ScenarioConfig cfg;
    std::uint64_t seed;
    std::string dir;
  };
  std::vector<Job> jobs;
  for (const std::string& ctrl : axes.controllers)
    for (double scale : axes.demand_scales)
      for (std::uint64_t seed : axes.seeds) {
        ScenarioConfig c = cfg;
        c.demand_scale = scale;
        c.controllers.clear();
        for (const std::string& id : cfg.network.intersections) {
          ControllerAssignment a;
          a.intersection = id;
          a.name = ctrl;
          // reuse parameter blocks from the base config when the name matches
          for (const auto& base : cfg.controllers)
            if (base.intersection == id && base.name == ctrl) a.params = base.params;
          c.controllers.push_back(std::move(a));
        }
        std::ostringstream dir;
        dir << ctrl << "_x" << scale << "_s" << seed;
        jobs.push_back({std::move(c), seed, (fs::path(out_dir) / dir.str()).string()});
      }

  if (parallelism == 0) {
    if (const char* env = std::getenv("TSC_PARALLEL"))
      parallelism = static_cast<unsigned>(std::atoi(env));
    if (parallelism == 0) parallelism = std::thread::hardware_concurrency();
    if (parallelism == 0) parallelism = 1;
  }

  std::vector<RunResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      try {
        results[k] = run_episode(jobs[k].cfg, jobs[k].seed, jobs[k].dir);
      } catch (const std::exception& e) {
        results[k].failed = true;
        results[k].error = e.what();
        results[k].controller_label = jobs[k].cfg.controllers.empty()
                                          ? "extend"
                                          : jobs[k].cfg.controllers.front().name;
        results[k].demand_scale = jobs[k].cfg.demand_scale;
        results[k].seed = jobs[k].seed;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned i = 0; i < std::min<std::size_t>(parallelism, jobs.size()); ++i)
    pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  SweepOutcome out;
  out.runs = std::move(results);
  for (const std::string& ctrl : axes.controllers)
    for (double scale : axes.demand_scales) {
      SweepCell cell;
      cell.controller = ctrl;
      cell.demand_scale = scale;
      std::vector<double> att, ad, thr;
      for (const auto& r : out.runs) {
        if (r.failed || r.controller_label != ctrl || r.demand_scale != scale) continue;
        ++cell.n;
        thr.push_back(static_cast<double>(r.episode.throughput));
        if (r.episode.average_travel_time) att.push_back(*r.episode.average_travel_time);
        if (r.episode.average_delay) ad.push_back(*r.episode.average_delay);
      }
      double m = 0, sd = 0;
      mean_std(thr, m, sd);
      cell.throughput_mean = m;
      cell.throughput_std = sd;
      if (!att.empty()) {
        mean_std(att, m, sd);
        cell.att_mean = m;
        cell.att_std = sd;
      }
      if (!ad.empty()) {
        mean_std(ad, m, sd);
        cell.ad_mean = m;
        cell.ad_std = sd;
      }
      out.table.push_back(std::move(cell));
    }
  return out;
}

std::string write_results(const SweepOutcome& outcome, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::string table_path = (fs::path(out_dir) / "comparison.csv").string();
  {
    std::ofstream t(table_path);
    t << "controller,demand_scale,n,att_mean,att_std,ad_mean,ad_std,"
         "throughput_mean,throughput_std\n";
    for (const auto& c : outcome.table) {
      t << c.controller << ',' << c.demand_scale << ',' << c.n << ',';
      t << (c.att_mean ? csv_num(*c.att_mean) : "") << ','
        << (c.att_std ? csv_num(*c.att_std) : "") << ','
        << (c.ad_mean ? csv_num(*c.ad_mean) : "") << ','
        << (c.ad_std ? csv_num(*c.ad_std) : "") << ',' << csv_num(c.throughput_mean)
        << ',' << csv_num(c.throughput_std) << '\n';
    }
  }

  json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["files"] = json::array();
  auto add_file = [&](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return;
    std::ostringstream buf;
    buf << in.rdbuf();
    manifest["files"].push_back(
        {{"path", path}, {"digest", hex_digest(fnv1a(buf.str()))}});
  };
  add_file(table_path);
  for (const auto& r : outcome.runs) {
    if (!r.step_csv_path.empty()) add_file(r.step_csv_path);
    if (!r.episode_json_path.empty()) add_file(r.episode_json_path);
  }
  std::string manifest_path = (fs::path(out_dir) / "manifest.json").string();
  std::ofstream(manifest_path) << manifest.dump(2) << "\n";
  return manifest_path;
}

}  // namespace tsc::harness
