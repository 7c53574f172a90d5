#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsc/core/sim.hpp"

namespace tsc::metrics {

struct ZeroDenominator : std::runtime_error {
  explicit ZeroDenominator(const std::string& what) : std::runtime_error(what) {}
};
struct MixedCycleLengths : std::runtime_error {
  explicit MixedCycleLengths(const std::string& what) : std::runtime_error(what) {}
};

struct CostCoefficients {
  double a = 1.0;  // weight on queue length
  double b = 1.0;  // weight on stops
};

// Per-intersection step criteria. Naming note: "delay" here means stop time
// (speed below the threshold); the speed-based time loss is "actual delay".
struct StepMetrics {
  double queue_length = 0;      // Q^t, vehicles below v_th
  double actual_delay = 0;      // AD^t, s
  double stops = 0;             // NS^t, stops taken this step
  double cumulative_delay = 0;  // CD^t, s, over the detection area
  double vehicle_count = 0;     // VC^t, on incoming links
  double cumulative_travel = 0; // CTT^t, s
  double delay_difference = 0;  // DCD^t = CD^t - CD^{t-1}
  double cost = 0;              // a*Q + b*NS
};

struct EpisodeMetrics {
  std::optional<double> average_travel_time;  // ATT, s, absent if no trips
  std::optional<double> average_delay;        // AD, s
  long throughput = 0;                        // completed trips
};

// Computes all step criteria for one intersection. The detection area is the
// set of incoming links; prev_cd is last step's CD^t for the same
// intersection (0 at t = 0).
StepMetrics intersection_step_metrics(const core::SimState& s,
                                      const core::NetworkSpec& net,
                                      int intersection, double prev_cd,
                                      const CostCoefficients& coeffs = {},
                                      double tau = 1.0);

EpisodeMetrics network_episode_metrics(const std::vector<core::VehicleRecord>& vehicles);

// Platoon ratio from flow rates, R_p = f_g / f.
double platoon_ratio_flows(double flow_green, double flow_cycle);
// Platoon ratio from proportions, R_p = P / (g/c).
double platoon_ratio_proportions(double p_green_arrivals, double green_over_cycle);

// Maps a platoon ratio onto arrival types 1..6 by nearest anchor value;
// exact midpoints round up, values outside the anchor range clamp.
int arrival_type(double platoon_ratio);

// One coordinated approach per intersection along a corridor.
struct CorridorSignal {
  core::CyclePlan plan;
  int coordinated_slot = 0;      // index into plan.phases
  double spacing_m = 0;          // distance from the previous intersection
};

struct GreenBand {
  double width_s = 0;
  double efficiency_pct = 0;
};

// Width of the time window letting a platoon traverse every intersection in
// green, travelling at platoon_speed. direction +1 walks the list in order,
// -1 in reverse.
GreenBand green_band(const std::vector<CorridorSignal>& corridor,
                     double platoon_speed, int direction = +1);

}  // namespace tsc::metrics
