#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsc/core/demand.hpp"
#include "tsc/core/network.hpp"
#include "tsc/core/signal.hpp"
#include "tsc/rng.hpp"

namespace tsc::core {

struct ConflictViolation : std::runtime_error {
  explicit ConflictViolation(const std::string& what) : std::runtime_error(what) {}
};

struct SimConfig {
  double tau = 1.0;        // step length, s
  double v_th = 2.0;       // stop-speed threshold, m/s
  long horizon = 3600;     // steps
  std::uint64_t seed = 0;
  // fractional mode: expected-value arrivals and fractional discharge, no
  // per-vehicle tracking; used by the rolling-horizon internal model
  bool fractional = false;

  void validate() const {
    if (tau <= 0) throw ConfigError("tau must be positive");
    if (v_th <= 0) throw ConfigError("v_th must be positive");
    if (horizon < 0) throw ConfigError("horizon must be nonnegative");
  }
};

struct VehicleRecord {
  long id = -1;
  long entry_step = 0;
  long exit_step = -1;  // -1 while in network
  double delay_s = 0;   // cumulative stop time over the whole trip
  double travel_s = 0;
  int stops = 0;
  // accumulators for the current link (the intersection detection area);
  // reset when the vehicle crosses a stop line
  double link_delay_s = 0;
  double link_travel_s = 0;
  int link_stops = 0;
  bool below_threshold = false;
  double speed = 0;        // proxy: 0 queued, v* in transit
  int stops_this_step = 0;

  bool completed() const { return exit_step >= 0; }
};

// Traffic maturing onto the queue after a free-flow traversal lag.
struct InTransitBatch {
  long arrive_step = 0;
  double count = 0;
  std::vector<long> vehicle_ids;  // unit mode only
};

struct LinkState {
  // one queue per movement leaving this link, indexed parallel to
  // NetworkSpec::movements_of_link
  std::vector<std::deque<long>> queues;       // unit mode
  std::vector<double> queue_counts;           // both modes (veh)
  std::vector<double> discharge_credit;       // fractional discharge remainder
  std::deque<InTransitBatch> transit;
  double backlog = 0;                          // arrivals waiting for storage
  std::deque<long> backlog_ids;

  double queue_total() const {
    double q = 0;
    for (double v : queue_counts) q += v;
    return q;
  }
  double transit_total() const {
    double n = 0;
    for (const auto& b : transit) n += b.count;
    return n;
  }
  double occupancy() const { return queue_total() + transit_total(); }
};

struct SimState {
  long clock = 0;
  std::vector<LinkState> links;
  std::vector<SignalState> signals;  // per intersection
  std::vector<std::optional<CyclePlan>> plans;  // plan-mode intersections
  std::vector<VehicleRecord> vehicles;  // indexed by id, unit mode
  double entered = 0;
  double exited = 0;
  DemandState demand;
  Rng rng;
  std::map<std::string, int> last_arrivals;  // entry detector emulation

  double present() const {
    double n = 0;
    for (const auto& l : links) n += l.occupancy();
    return n;
  }
};

struct StepEvents {
  long t = 0;
  std::map<std::string, int> arrivals;            // link -> entered this step
  std::map<std::string, double> discharges;       // movement -> veh discharged
  std::vector<int> phase_of_intersection;         // phase idx per intersection
  std::vector<InterlockMode> mode_of_intersection;
};

class Simulator {
 public:
  Simulator(NetworkSpec net, SimConfig cfg, DemandProfile demand);

  // Fresh state at t = 0: empty links, first scheme phase green everywhere.
  SimState initial_state() const;

  // One action per controlled intersection (indexed by intersection order).
  // In fractional mode `injected_arrivals` may replace the stochastic
  // boundary draw with externally supplied expected counts per entry link.
  StepEvents step(SimState& s, const std::vector<SignalAction>& actions,
                  const std::map<std::string, double>* injected_arrivals = nullptr) const;

  // Installs a fixed cycle plan on one intersection; per-step actions are
  // then ignored there.
  void set_plan(SimState& s, int intersection, CyclePlan plan) const;

  const NetworkSpec& network() const { return net_; }
  const SimConfig& config() const { return cfg_; }
  const DemandProfile& demand() const { return demand_; }

 private:
  void apply_signals(SimState& s, const std::vector<SignalAction>& actions) const;
  void inject_arrivals(SimState& s, StepEvents& ev,
                       const std::map<std::string, double>* injected) const;
  void mature_transit(SimState& s) const;
  void discharge(SimState& s, StepEvents& ev) const;
  void update_trackers(SimState& s) const;
  void check_conflicts(const SimState& s) const;

  NetworkSpec net_;
  SimConfig cfg_;
  DemandProfile demand_;
};

}  // namespace tsc::core
