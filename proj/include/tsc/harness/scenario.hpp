#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsc/core/demand.hpp"
#include "tsc/core/network.hpp"
#include "tsc/core/sim.hpp"
#include "tsc/momdp/factored_state.hpp"

namespace tsc::harness {

inline constexpr int kSchemaVersion = 1;

struct ControllerAssignment {
  std::string intersection;
  std::string name;
  nlohmann::json params = nlohmann::json::object();
};

// Fully-resolved experiment description. Loaded from a JSON file; defaults
// are filled in at parse time so the scenario hash covers them too.
struct ScenarioConfig {
  std::string name = "scenario";
  core::NetworkSpec network;
  core::DemandProfile demand;
  core::SimConfig sim;
  momdp::DesignLevel level = momdp::DesignLevel::L1;
  double bin_width = 5.0;
  std::vector<ControllerAssignment> controllers;
  std::vector<std::uint64_t> seeds;
  std::string out_dir = "results";
  double demand_scale = 1.0;

  void validate() const;  // ConfigError with a field path
};

ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioConfig& cfg);
ScenarioConfig load_scenario(const std::string& path);

// FNV-1a 64-bit, the digest used for scenario hashes and the file manifest.
std::uint64_t fnv1a(const std::string& bytes);
std::string hex_digest(std::uint64_t h);

// Stable digest of the fully-resolved config (defaults included).
std::string scenario_hash(const ScenarioConfig& cfg);

// The demand profile with every rate multiplied by `scale`.
core::DemandProfile scaled_demand(const core::DemandProfile& demand, double scale);

}  // namespace tsc::harness
