#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsc/core/sim.hpp"
#include "tsc/momdp/belief.hpp"

namespace tsc::momdp {

struct UnknownIntersection : std::runtime_error {
  explicit UnknownIntersection(const std::string& what) : std::runtime_error(what) {}
};

// Observation design levels: which state components the controller sees.
//   L1: controlled region only.
//   L2: controlled region + boundary demand reading.
//   L3: controlled region + modeled neighbors.
//   L4: controlled region + neighbors + demand belief.
enum class DesignLevel { L1 = 1, L2 = 2, L3 = 3, L4 = 4 };

DesignLevel design_level_from_string(const std::string& s);
const char* to_string(DesignLevel level);

// Per-intersection feature block: per-incoming-link queues, active phase and
// its progress through the allowed green window.
struct IntersectionFeatures {
  std::vector<double> link_queues;  // ordered by incoming link index
  int phase = 0;                    // index within the scheme's phase order
  double phase_progress = 0;        // elapsed green / max green, in [0,1]
};

struct FactoredState {
  IntersectionFeatures controlled;                 // s_c
  std::vector<IntersectionFeatures> neighbors;     // s_m, empty below L3
  std::vector<double> demand_reading;              // d, veh entered last step
  std::optional<DemandBelief> demand_belief;       // b_d, L4 only
  DesignLevel level = DesignLevel::L1;
};

struct BoundaryConfig {
  std::string intersection;
  DesignLevel level = DesignLevel::L1;
  int neighbor_hops = 1;  // included neighbor radius at L3/L4
};

// Builds the factored observation for one intersection at the configured
// design level. The demand belief, when requested, is supplied by the caller
// (the filter is per-controller state).
FactoredState observe(const core::SimState& s, const core::NetworkSpec& net,
                      const BoundaryConfig& cfg,
                      const std::optional<DemandBelief>& belief = std::nullopt);

}  // namespace tsc::momdp
