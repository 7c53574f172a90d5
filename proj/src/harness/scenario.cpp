#include "tsc/harness/scenario.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace tsc::harness {

using nlohmann::json;
using core::ConfigError;

namespace {

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : it->get<T>();
}

core::NetworkSpec network_from_json(const json& j) {
  core::NetworkSpec net;
  for (const auto& s : get_or<std::vector<std::string>>(j, "intersections", {}))
    net.intersections.push_back(s);
  for (const auto& lj : j.value("links", json::array())) {
    core::Link l;
    l.id = lj.at("id").get<std::string>();
    l.from_node = get_or<std::string>(lj, "from", "");
    l.to_node = get_or<std::string>(lj, "to", "");
    l.length_m = get_or<double>(lj, "length_m", 100.0);
    l.free_flow_speed = get_or<double>(lj, "free_flow_speed", 15.0);
    l.saturation_rate = get_or<double>(lj, "saturation_rate", 0.5);
    l.storage_capacity = get_or<double>(lj, "storage_capacity", 40.0);
    net.links.push_back(std::move(l));
  }
  for (const auto& mj : j.value("movements", json::array())) {
    core::Movement m;
    m.id = mj.at("id").get<std::string>();
    m.in_link = mj.at("in").get<std::string>();
    m.out_link = get_or<std::string>(mj, "out", "");
    net.movements.push_back(std::move(m));
  }
  for (const auto& pj : j.value("phases", json::array())) {
    core::Phase p;
    p.id = pj.at("id").get<std::string>();
    p.movements = pj.at("movements").get<std::vector<std::string>>();
    net.phases.push_back(std::move(p));
  }
  for (const auto& sj : j.value("schemes", json::array())) {
    core::PhasingScheme s;
    s.intersection = sj.at("intersection").get<std::string>();
    s.phase_order = sj.at("phase_order").get<std::vector<std::string>>();
    s.yellow_s = get_or<double>(sj, "yellow_s", 3.0);
    s.all_red_s = get_or<double>(sj, "all_red_s", 2.0);
    s.min_green_s = get_or<double>(sj, "min_green_s", 5.0);
    s.max_green_s = get_or<double>(sj, "max_green_s", 60.0);
    net.schemes.push_back(std::move(s));
  }
  net.entry_links = get_or<std::vector<std::string>>(j, "entry_links", {});
  net.exit_links = get_or<std::vector<std::string>>(j, "exit_links", {});
  for (const auto& cj : j.value("conflicts", json::array()))
    net.conflicts.emplace_back(cj.at(0).get<std::string>(), cj.at(1).get<std::string>());
  return net;
}

json network_to_json(const core::NetworkSpec& net) {
  json j;
  j["intersections"] = net.intersections;
  j["links"] = json::array();
  for (const auto& l : net.links)
    j["links"].push_back({{"id", l.id},
                          {"from", l.from_node},
                          {"to", l.to_node},
                          {"length_m", l.length_m},
                          {"free_flow_speed", l.free_flow_speed},
                          {"saturation_rate", l.saturation_rate},
                          {"storage_capacity", l.storage_capacity}});
  j["movements"] = json::array();
  for (const auto& m : net.movements)
    j["movements"].push_back({{"id", m.id}, {"in", m.in_link}, {"out", m.out_link}});
  j["phases"] = json::array();
  for (const auto& p : net.phases)
    j["phases"].push_back({{"id", p.id}, {"movements", p.movements}});
  j["schemes"] = json::array();
  for (const auto& s : net.schemes)
    j["schemes"].push_back({{"intersection", s.intersection},
                            {"phase_order", s.phase_order},
                            {"yellow_s", s.yellow_s},
                            {"all_red_s", s.all_red_s},
                            {"min_green_s", s.min_green_s},
                            {"max_green_s", s.max_green_s}});
  j["entry_links"] = net.entry_links;
  j["exit_links"] = net.exit_links;
  j["conflicts"] = json::array();
  for (const auto& [a, b] : net.conflicts) j["conflicts"].push_back({a, b});
  return j;
}

core::DemandProfile demand_from_json(const json& j) {
  core::DemandProfile d;
  for (const auto& ej : j) {
    std::string link = ej.at("link").get<std::string>();
    std::string type = get_or<std::string>(ej, "type", "schedule");
    if (type == "schedule") {
      core::RateSchedule s;
      s.start_steps = get_or<std::vector<long>>(ej, "start_steps", {0});
      s.rates = ej.at("rates").get<std::vector<double>>();
      if (s.start_steps.size() != s.rates.size())
        throw ConfigError("demand[" + link + "]: start_steps/rates size mismatch");
      d.add_schedule(link, std::move(s));
    } else if (type == "regime") {
      core::RegimeProcess p;
      p.rates = ej.at("rates").get<std::vector<double>>();
      p.transition = ej.at("transition").get<std::vector<std::vector<double>>>();
      p.initial_regime = get_or<int>(ej, "initial_regime", 0);
      d.add_regime(link, std::move(p));
    } else {
      throw ConfigError("demand[" + link + "]: unknown type " + type);
    }
  }
  return d;
}

json demand_to_json(const core::DemandProfile& d) {
  json j = json::array();
  for (const auto& e : d.entries()) {
    json ej;
    ej["link"] = e.link;
    if (e.is_regime) {
      ej["type"] = "regime";
      ej["rates"] = e.regime.rates;
      ej["transition"] = e.regime.transition;
      ej["initial_regime"] = e.regime.initial_regime;
    } else {
      ej["type"] = "schedule";
      ej["start_steps"] = e.schedule.start_steps;
      ej["rates"] = e.schedule.rates;
    }
    j.push_back(std::move(ej));
  }
  return j;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (seeds.empty()) throw ConfigError("seeds: must be nonempty");
  if (demand_scale <= 0) throw ConfigError("demand_scale: must be positive");
  sim.validate();
  for (const auto& c : controllers) {
    if (!network.intersection_index.count(c.intersection))
      throw ConfigError("controllers[" + c.intersection + "]: unknown intersection");
    if (c.name.empty()) throw ConfigError("controllers[" + c.intersection + "]: empty name");
  }
  for (const auto& e : demand.entries())
    if (!network.link_index.count(e.link))
      throw ConfigError("demand[" + e.link + "]: unknown link");
}

ScenarioConfig scenario_from_json(const json& j) {
  int version = get_or<int>(j, "schema_version", kSchemaVersion);
  if (version != kSchemaVersion)
    throw ConfigError("schema_version: unsupported version " + std::to_string(version));
  ScenarioConfig cfg;
  cfg.name = get_or<std::string>(j, "name", "scenario");
  if (j.contains("network_file")) {
    std::ifstream in(j.at("network_file").get<std::string>());
    if (!in) throw ConfigError("network_file: cannot open");
    json nj;
    in >> nj;
    cfg.network = network_from_json(nj);
  } else {
    cfg.network = network_from_json(j.at("network"));
  }
  cfg.demand = demand_from_json(j.value("demand", json::array()));
  const json& sj = j.value("sim", json::object());
  cfg.sim.tau = get_or<double>(sj, "tau", 1.0);
  cfg.sim.v_th = get_or<double>(sj, "v_th", 2.0);
  cfg.sim.horizon = get_or<long>(sj, "horizon", 3600);
  const json& oj = j.value("observation", json::object());
  cfg.level = momdp::design_level_from_string(get_or<std::string>(oj, "level", "L1"));
  cfg.bin_width = get_or<double>(oj, "bin_width", 5.0);
  for (const auto& cj : j.value("controllers", json::array())) {
    ControllerAssignment a;
    a.intersection = cj.at("intersection").get<std::string>();
    a.name = cj.at("name").get<std::string>();
    a.params = cj.value("params", json::object());
    cfg.controllers.push_back(std::move(a));
  }
  cfg.seeds = get_or<std::vector<std::uint64_t>>(j, "seeds", {0});
  cfg.out_dir = get_or<std::string>(j, "out_dir", "results");
  cfg.demand_scale = get_or<double>(j, "demand_scale", 1.0);

  cfg.network.finalize(cfg.sim.tau);
  cfg.validate();
  return cfg;
}

json scenario_to_json(const ScenarioConfig& cfg) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = cfg.name;
  j["network"] = network_to_json(cfg.network);
  j["demand"] = demand_to_json(cfg.demand);
  j["sim"] = {{"tau", cfg.sim.tau}, {"v_th", cfg.sim.v_th}, {"horizon", cfg.sim.horizon}};
  j["observation"] = {{"level", momdp::to_string(cfg.level)}, {"bin_width", cfg.bin_width}};
  j["controllers"] = json::array();
  for (const auto& c : cfg.controllers)
    j["controllers"].push_back(
        {{"intersection", c.intersection}, {"name", c.name}, {"params", c.params}});
  j["seeds"] = cfg.seeds;
  j["out_dir"] = cfg.out_dir;
  j["demand_scale"] = cfg.demand_scale;
  return j;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("scenario file: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario file: parse error: ") + e.what());
  }
  return scenario_from_json(j);
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex_digest(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string scenario_hash(const ScenarioConfig& cfg) {
  return hex_digest(fnv1a(scenario_to_json(cfg).dump()));
}

core::DemandProfile scaled_demand(const core::DemandProfile& demand, double scale) {
  core::DemandProfile out;
  for (const auto& e : demand.entries()) {
    if (e.is_regime) {
      core::RegimeProcess p = e.regime;
      for (double& r : p.rates) r *= scale;
      out.add_regime(e.link, std::move(p));
    } else {
      core::RateSchedule s = e.schedule;
      for (double& r : s.rates) r *= scale;
      out.add_schedule(e.link, std::move(s));
    }
  }
  return out;
}

}  // namespace tsc::harness
