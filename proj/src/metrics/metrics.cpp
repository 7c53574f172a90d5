#include "tsc/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace tsc::metrics {

StepMetrics intersection_step_metrics(const core::SimState& s,
                                      const core::NetworkSpec& net,
                                      int intersection, double prev_cd,
                                      const CostCoefficients& coeffs, double tau) {
  StepMetrics m;
  const auto& incoming = net.incoming_links[static_cast<std::size_t>(intersection)];
  for (int li : incoming) {
    const core::LinkState& link = s.links[static_cast<std::size_t>(li)];
    double vstar = net.link(li).free_flow_speed;
    if (s.vehicles.empty() && (link.queue_total() > 0 || link.transit_total() > 0)) {
      // fractional mode: only count-based criteria are defined
      m.queue_length += link.queue_total();
      m.vehicle_count += link.occupancy();
      continue;
    }
    for (const auto& q : link.queues) {
      for (long vid : q) {
        const core::VehicleRecord& rec = s.vehicles[static_cast<std::size_t>(vid)];
        m.queue_length += 1;
        m.vehicle_count += 1;
        m.actual_delay += (vstar - rec.speed) / vstar;  // speed 0 -> full step lost
        m.stops += rec.stops_this_step;
        m.cumulative_delay += rec.link_delay_s;
        m.cumulative_travel += rec.link_travel_s;
      }
    }
    for (const auto& batch : link.transit) {
      for (long vid : batch.vehicle_ids) {
        const core::VehicleRecord& rec = s.vehicles[static_cast<std::size_t>(vid)];
        m.vehicle_count += 1;
        m.actual_delay += (vstar - rec.speed) / vstar;
        m.stops += rec.stops_this_step;
        m.cumulative_delay += rec.link_delay_s;
        m.cumulative_travel += rec.link_travel_s;
      }
    }
  }
  m.actual_delay *= tau;
  m.delay_difference = m.cumulative_delay - prev_cd;
  m.cost = coeffs.a * m.queue_length + coeffs.b * m.stops;
  return m;
}

EpisodeMetrics network_episode_metrics(const std::vector<core::VehicleRecord>& vehicles) {
  EpisodeMetrics em;
  double tt = 0, dd = 0;
  for (const auto& v : vehicles) {
    if (!v.completed()) continue;
    em.throughput += 1;
    tt += v.travel_s;
    dd += v.delay_s;
  }
  if (em.throughput > 0) {
    em.average_travel_time = tt / static_cast<double>(em.throughput);
    em.average_delay = dd / static_cast<double>(em.throughput);
  }
  return em;
}

double platoon_ratio_flows(double flow_green, double flow_cycle) {
  if (flow_cycle <= 0) throw ZeroDenominator("cycle flow must be positive");
  return flow_green / flow_cycle;
}

double platoon_ratio_proportions(double p_green_arrivals, double green_over_cycle) {
  if (green_over_cycle <= 0) throw ZeroDenominator("g/c must be positive");
  return p_green_arrivals / green_over_cycle;
}

int arrival_type(double rp) {
  static const double anchors[6] = {0.333, 0.667, 1.000, 1.333, 1.667, 2.000};
  if (rp <= anchors[0]) return 1;
  if (rp >= anchors[5]) return 6;
  for (int k = 0; k < 5; ++k) {
    if (rp < anchors[k + 1]) {
      double mid = 0.5 * (anchors[k] + anchors[k + 1]);
      return rp < mid ? k + 1 : k + 2;  // midpoint rounds up
    }
  }
  return 6;
}

namespace {

struct Interval {
  double lo, hi;  // [lo, hi)
};

// circular window [start mod C, start + len) as 1-2 linear intervals
std::vector<Interval> circular_window(double start, double len, double cycle) {
  std::vector<Interval> out;
  if (len <= 0) return out;
  if (len >= cycle) {
    out.push_back({0, cycle});
    return out;
  }
  double a = std::fmod(start, cycle);
  if (a < 0) a += cycle;
  double b = a + len;
  if (b <= cycle) {
    out.push_back({a, b});
  } else {
    out.push_back({a, cycle});
    out.push_back({0, b - cycle});
  }
  return out;
}

std::vector<Interval> intersect(const std::vector<Interval>& xs,
                                const std::vector<Interval>& ys) {
  std::vector<Interval> out;
  for (const auto& x : xs)
    for (const auto& y : ys) {
      double lo = std::max(x.lo, y.lo);
      double hi = std::min(x.hi, y.hi);
      if (hi - lo > 1e-12) out.push_back({lo, hi});
    }
  return out;
}

}  // namespace

GreenBand green_band(const std::vector<CorridorSignal>& corridor,
                     double platoon_speed, int direction) {
  if (corridor.empty()) return {};
  if (platoon_speed <= 0) throw ZeroDenominator("platoon speed must be positive");
  double cycle = corridor.front().plan.cycle_s;
  for (const auto& cs : corridor)
    if (std::abs(cs.plan.cycle_s - cycle) > 1e-9)
      throw MixedCycleLengths("corridor plans must share one cycle length");

  std::vector<double> pos(corridor.size(), 0.0);
  for (std::size_t i = 1; i < corridor.size(); ++i)
    pos[i] = pos[i - 1] + corridor[i].spacing_m;
  double ref = direction >= 0 ? pos.front() : pos.back();

  std::vector<Interval> feasible = {{0, cycle}};
  for (std::size_t i = 0; i < corridor.size(); ++i) {
    const core::CyclePlan& plan = corridor[i].plan;
    double start = plan.offset_s;
    for (int k = 0; k < corridor[i].coordinated_slot; ++k)
      start += plan.splits_s[static_cast<std::size_t>(k)] + plan.change_interval();
    double green = plan.splits_s[static_cast<std::size_t>(corridor[i].coordinated_slot)];
    double travel = std::abs(pos[i] - ref) / platoon_speed;
    // a platoon departing the reference point at time t reaches this signal
    // at t + travel; feasible departure times satisfy the green window
    auto window = circular_window(start - travel, green, cycle);
    feasible = intersect(feasible, window);
    if (feasible.empty()) break;
  }

  GreenBand band;
  for (const auto& iv : feasible) band.width_s += iv.hi - iv.lo;
  band.efficiency_pct = cycle > 0 ? band.width_s / cycle * 100.0 : 0.0;
  return band;
}

}  // namespace tsc::metrics
