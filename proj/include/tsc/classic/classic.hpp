#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "tsc/core/signal.hpp"

namespace tsc::classic {

struct Oversaturated : std::runtime_error {
  explicit Oversaturated(const std::string& what) : std::runtime_error(what) {}
};
struct DegenerateDemand : std::runtime_error {
  explicit DegenerateDemand(const std::string& what) : std::runtime_error(what) {}
};

struct WebsterInput {
  std::vector<std::string> phases;
  std::vector<double> critical_flows;    // veh/h per phase
  std::vector<double> saturation_flows;  // veh/h per phase
  double lost_time_s = 0;                // L, per cycle
  double cycle_s = 0;                    // 0 -> compute the optimal cycle
  double yellow_s = 0;
  double all_red_s = 0;
  double offset_s = 0;
};

// Webster split allocation: optimal cycle C = (1.5 L + 5) / (1 - Y) when not
// given, effective green g_i = (C - L) * y_i / Y.
core::CyclePlan webster_plan(const WebsterInput& in);

struct ActuatedConfig {
  double gap_time_s = 3.0;  // unit extension
  double min_green_s = 5.0;
  double max_green_s = 60.0;
};

// Gap-out / max-out actuation. `seconds_since_arrival` is the age of the
// newest arrival detected on the served approach.
core::SignalAction actuated_decide(double seconds_since_arrival, double elapsed_green_s,
                                   const ActuatedConfig& cfg);

struct PhaseQueues {
  std::string phase;
  // (upstream queue, downstream queue) per movement; sink movements carry
  // downstream 0
  std::vector<std::pair<double, double>> movements;
};

// Phase with maximal total upstream-minus-downstream queue difference; ties
// break to the lowest phase index.
core::SignalAction max_pressure_decide(const std::vector<PhaseQueues>& phases);
double phase_pressure(const PhaseQueues& p);

// Phase with the maximal summed upstream queue; deliberately blind to
// downstream congestion.
core::SignalAction max_queue_first_decide(const std::vector<std::string>& phases,
                                          const std::vector<double>& queue_totals);

}  // namespace tsc::classic
