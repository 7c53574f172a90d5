#include "tsc/classic/classic.hpp"

#include <cmath>

namespace tsc::classic {

core::CyclePlan webster_plan(const WebsterInput& in) {
  if (in.phases.empty() || in.phases.size() != in.critical_flows.size() ||
      in.phases.size() != in.saturation_flows.size())
    throw std::invalid_argument("webster: phases/flows/saturations size mismatch");

  double Y = 0;
  bool any_flow = false;
  std::vector<double> y(in.phases.size());
  for (std::size_t i = 0; i < in.phases.size(); ++i) {
    if (in.critical_flows[i] < 0) throw std::invalid_argument("webster: negative flow");
    if (in.saturation_flows[i] <= 0)
      throw std::invalid_argument("webster: saturation flow must be positive");
    y[i] = in.critical_flows[i] / in.saturation_flows[i];
    Y += y[i];
    if (in.critical_flows[i] > 0) any_flow = true;
  }
  if (!any_flow) throw DegenerateDemand("webster: all critical flows are zero");
  if (Y >= 1.0) throw Oversaturated("webster: total flow ratio >= 1");

  double C = in.cycle_s;
  if (C <= 0) C = std::ceil((1.5 * in.lost_time_s + 5.0) / (1.0 - Y));
  if (in.lost_time_s >= C)
    throw std::invalid_argument("webster: lost time must be below the cycle length");

  core::CyclePlan plan;
  plan.phases = in.phases;
  plan.yellow_s = in.yellow_s;
  plan.all_red_s = in.all_red_s;
  plan.offset_s = in.offset_s;
  double total = 0;
  for (std::size_t i = 0; i < in.phases.size(); ++i) {
    double g = (C - in.lost_time_s) * y[i] / Y;
    plan.splits_s.push_back(g);
    total += g + plan.change_interval();
  }
  // Greens absorb C - L; the cycle closes exactly when the lost time equals
  // the summed change intervals.
  plan.cycle_s = total;
  return plan;
}

core::SignalAction actuated_decide(double seconds_since_arrival, double elapsed_green_s,
                                   const ActuatedConfig& cfg) {
  if (cfg.gap_time_s <= 0) throw std::invalid_argument("actuated: gap time must be positive");
  if (cfg.min_green_s > cfg.max_green_s)
    throw std::invalid_argument("actuated: min green above max green");
  if (elapsed_green_s < cfg.min_green_s) return core::SignalAction::extend();
  if (elapsed_green_s >= cfg.max_green_s) return core::SignalAction::change();  // max out
  if (seconds_since_arrival > cfg.gap_time_s) return core::SignalAction::change();  // gap out
  return core::SignalAction::extend();
}

double phase_pressure(const PhaseQueues& p) {
  double sum = 0;
  for (const auto& [up, down] : p.movements) sum += up - down;
  return sum;
}

core::SignalAction max_pressure_decide(const std::vector<PhaseQueues>& phases) {
  if (phases.empty()) throw std::invalid_argument("max pressure: no phases");
  std::size_t best = 0;
  double best_p = phase_pressure(phases[0]);
  for (std::size_t i = 1; i < phases.size(); ++i) {
    double p = phase_pressure(phases[i]);
    if (p > best_p) {
      best_p = p;
      best = i;
    }
  }
  return core::SignalAction::target(phases[best].phase);
}

core::SignalAction max_queue_first_decide(const std::vector<std::string>& phases,
                                          const std::vector<double>& queue_totals) {
  if (phases.empty() || phases.size() != queue_totals.size())
    throw std::invalid_argument("max queue: phases/queues size mismatch");
  std::size_t best = 0;
  for (std::size_t i = 1; i < phases.size(); ++i)
    if (queue_totals[i] > queue_totals[best]) best = i;
  return core::SignalAction::target(phases[best]);
}

}  // namespace tsc::classic
