#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsc/core/sim.hpp"
#include "tsc/metrics/metrics.hpp"
#include "tsc/momdp/belief.hpp"

namespace tsc::rho {

struct MissingBelief : std::runtime_error {
  explicit MissingBelief(const std::string& what) : std::runtime_error(what) {}
};
struct InfeasibleSequence : std::runtime_error {
  explicit InfeasibleSequence(const std::string& what) : std::runtime_error(what) {}
};

enum class Forecast { Oracle, Belief, Flat };
Forecast forecast_from_string(const std::string& s);
const char* to_string(Forecast f);

// Step criterion summed over the horizon; the optimizer maximizes its
// negation (less queue / delay / cost is better).
enum class Objective { Queue, Delay, DelayDifference, Cost };
Objective objective_from_string(const std::string& s);
const char* to_string(Objective o);

struct RhoConfig {
  int horizon_steps = 4;  // T_p
  Forecast forecast = Forecast::Oracle;
  Objective objective = Objective::Queue;
  metrics::CostCoefficients coeffs;
  int intersection = 0;  // controlled intersection index
  int stride = 1;        // steps between re-plans
};

struct HorizonSolution {
  std::vector<core::SignalAction> actions;    // a*, length T_p
  std::vector<core::SimState> predicted;      // s-bar at t+1 .. t+T_p
  double objective = 0;                       // maximized value (negative criterion sum)
};

// Expected boundary arrivals per entry link for each of the next T_p steps.
//   oracle: lambda(t+k) * tau from the true profile.
//   belief: (b^T T^k) . rates * tau; links without a supplied belief fall
//           back to their scheduled rate, hidden-regime links require one.
//   flat:   the last observed count, held constant.
std::vector<std::map<std::string, double>> forecast_exogenous(
    const RhoConfig& cfg, const core::Simulator& model, long t,
    const std::map<std::string, int>& last_observed,
    const std::map<std::string, momdp::DemandBelief>* beliefs = nullptr);

// Deterministic expected-value rollout: advances a copy of `start` through
// the fractional-mode model, injecting the forecast arrivals; uncontrolled
// intersections extend (or follow their installed plans).
std::vector<core::SimState> rollout(const core::Simulator& model,
                                    const core::SimState& start,
                                    const std::vector<core::SignalAction>& actions,
                                    const std::vector<std::map<std::string, double>>& exo,
                                    int intersection);

// Exact search over the feasible Extend/Change tree (branching <= 2, pruned
// by min/max green and the interlock), depth-first with memoization; ties
// break Extend-first.
HorizonSolution optimize_horizon(const core::Simulator& model,
                                 const core::SimState& start,
                                 const std::vector<std::map<std::string, double>>& exo,
                                 const RhoConfig& cfg);

struct DecisionTrace {
  long t = 0;
  std::vector<std::map<std::string, double>> forecast;
  std::vector<core::SignalAction> plan;
  double predicted_objective = 0;
};

// Forecast, optimize, return the first planned action. `model` must be the
// fractional-mode twin of the executing simulator.
core::SignalAction mpc_step(const core::Simulator& model, const core::SimState& observed,
                            long t, const RhoConfig& cfg,
                            const std::map<std::string, int>& last_observed,
                            const std::map<std::string, momdp::DemandBelief>* beliefs = nullptr,
                            DecisionTrace* trace = nullptr);

void write_trace_line(const DecisionTrace& trace, double realized_objective,
                      std::ostream& os);

}  // namespace tsc::rho
