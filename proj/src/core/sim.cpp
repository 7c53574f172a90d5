#include "tsc/core/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tsc::core {

Simulator::Simulator(NetworkSpec net, SimConfig cfg, DemandProfile demand)
    : net_(std::move(net)), cfg_(cfg), demand_(std::move(demand)) {
  cfg_.validate();
  net_.finalize(cfg_.tau);
}

SimState Simulator::initial_state() const {
  SimState s;
  s.links.resize(net_.links.size());
  for (std::size_t l = 0; l < net_.links.size(); ++l) {
    std::size_t n_mov = net_.movements_of_link[l].size();
    s.links[l].queues.resize(n_mov);
    s.links[l].queue_counts.assign(n_mov, 0.0);
    s.links[l].discharge_credit.assign(n_mov, 0.0);
  }
  s.signals.resize(net_.intersections.size());
  s.plans.resize(net_.intersections.size());
  for (std::size_t i = 0; i < net_.intersections.size(); ++i) {
    const PhasingScheme& scheme = net_.scheme_for(static_cast<int>(i));
    s.signals[i].phase = net_.phase_index.at(scheme.phase_order.front());
    s.signals[i].mode = InterlockMode::Green;
    s.signals[i].elapsed_s = 0.0;
  }
  s.demand.reset(demand_);
  s.rng = Rng::derive(cfg_.seed, "sim");
  return s;
}

void Simulator::set_plan(SimState& s, int intersection, CyclePlan plan) const {
  plan.validate();
  for (const std::string& pid : plan.phases)
    if (!net_.phase_index.count(pid))
      throw UnknownPhase("cycle plan references unknown phase " + pid);
  s.plans[static_cast<std::size_t>(intersection)] = std::move(plan);
}

void Simulator::apply_signals(SimState& s, const std::vector<SignalAction>& actions) const {
  for (std::size_t i = 0; i < net_.intersections.size(); ++i) {
    SignalState& sig = s.signals[i];
    if (s.plans[i]) {
      const CyclePlan& plan = *s.plans[i];
      PlanPosition pos = apply_cycle_plan(plan, static_cast<double>(s.clock) * cfg_.tau);
      int phase = net_.phase_index.at(plan.phases[static_cast<std::size_t>(pos.slot)]);
      if (sig.phase != phase || (pos.mode == InterlockMode::Green &&
                                 sig.mode != InterlockMode::Green))
        sig.elapsed_s = 0.0;
      else if (pos.mode == InterlockMode::Green)
        sig.elapsed_s += cfg_.tau;
      sig.phase = phase;
      sig.mode = pos.mode;
      continue;
    }
    advance_signal(sig, net_, static_cast<int>(i),
                   i < actions.size() ? actions[i] : SignalAction::extend(), cfg_.tau);
  }
}

void Simulator::inject_arrivals(SimState& s, StepEvents& ev,
                                const std::map<std::string, double>* injected) const {
  std::map<std::string, double> counts;
  if (injected) {
    counts = *injected;
  } else if (cfg_.fractional) {
    for (const auto& e : demand_.entries())
      counts[e.link] += demand_.expected_rate(e.link, s.clock) * cfg_.tau;
  } else {
    auto drawn = sample_arrivals(demand_, s.demand, s.clock, cfg_.tau, s.rng);
    for (const auto& [link, n] : drawn) counts[link] += n;
  }
  // entry links with a waiting backlog must be processed even on zero-draw steps
  for (const auto& e : demand_.entries()) counts[e.link] += 0.0;

  s.last_arrivals.clear();
  for (const auto& [link_id, n] : counts) {
    int li = net_.link_index.at(link_id);
    LinkState& link = s.links[static_cast<std::size_t>(li)];
    double pending = n + link.backlog;
    double room = net_.link(li).storage_capacity - link.occupancy();
    double enter;
    if (cfg_.fractional) {
      enter = std::clamp(pending, 0.0, std::max(0.0, room));
    } else {
      enter = std::min(std::floor(pending + 1e-9), std::max(0.0, std::floor(room + 1e-9)));
    }
    if (enter > 0) {
      InTransitBatch batch;
      batch.arrive_step = s.clock + net_.lag_steps_cache[static_cast<std::size_t>(li)];
      batch.count = enter;
      if (!cfg_.fractional) {
        int k = static_cast<int>(enter);
        for (int v = 0; v < k; ++v) {
          VehicleRecord rec;
          rec.id = static_cast<long>(s.vehicles.size());
          rec.entry_step = s.clock;
          rec.below_threshold = false;
          rec.speed = net_.link(li).free_flow_speed;
          s.vehicles.push_back(rec);
          batch.vehicle_ids.push_back(rec.id);
        }
      }
      link.transit.push_back(std::move(batch));
      s.entered += enter;
      ev.arrivals[link_id] += static_cast<int>(std::lround(enter));
      s.last_arrivals[link_id] += static_cast<int>(std::lround(enter));
    }
    link.backlog = pending - enter;
  }
}

void Simulator::mature_transit(SimState& s) const {
  for (std::size_t li = 0; li < s.links.size(); ++li) {
    LinkState& link = s.links[li];
    std::size_t n_mov = link.queue_counts.size();
    while (!link.transit.empty() && link.transit.front().arrive_step <= s.clock) {
      InTransitBatch batch = std::move(link.transit.front());
      link.transit.pop_front();
      if (n_mov == 0) continue;  // dead-end link without movements
      if (cfg_.fractional) {
        double share = batch.count / static_cast<double>(n_mov);
        for (std::size_t m = 0; m < n_mov; ++m) link.queue_counts[m] += share;
      } else {
        for (long vid : batch.vehicle_ids) {
          std::size_t m = n_mov == 1
                              ? 0
                              : static_cast<std::size_t>(s.rng.next_below(n_mov));
          link.queues[m].push_back(vid);
          link.queue_counts[m] += 1.0;
        }
      }
    }
  }
}

void Simulator::discharge(SimState& s, StepEvents& ev) const {
  // movements of green phases discharge in movement-index order; residual
  // downstream capacity is consumed as vehicles move
  for (std::size_t i = 0; i < net_.intersections.size(); ++i) {
    const SignalState& sig = s.signals[i];
    if (sig.mode != InterlockMode::Green || sig.phase < 0) continue;
    for (int m : net_.phase_movements[static_cast<std::size_t>(sig.phase)]) {
      const Movement& mov = net_.movement(m);
      int in_li = net_.link_index.at(mov.in_link);
      LinkState& in_link = s.links[static_cast<std::size_t>(in_li)];
      // position of this movement's queue within the link
      const auto& link_movs = net_.movements_of_link[static_cast<std::size_t>(in_li)];
      std::size_t slot =
          static_cast<std::size_t>(std::find(link_movs.begin(), link_movs.end(), m) -
                                   link_movs.begin());

      double sat = net_.link(in_li).saturation_rate * cfg_.tau;
      double queue = in_link.queue_counts[slot];
      double residual = std::numeric_limits<double>::infinity();
      LinkState* out_link = nullptr;
      int out_li = -1;
      if (!mov.is_sink()) {
        out_li = net_.link_index.at(mov.out_link);
        out_link = &s.links[static_cast<std::size_t>(out_li)];
        residual = std::max(0.0, net_.link(out_li).storage_capacity - out_link->occupancy());
      }

      double n;
      if (cfg_.fractional) {
        n = std::min({sat, queue, residual});
      } else {
        double& credit = in_link.discharge_credit[slot];
        credit += sat;
        n = std::min({std::floor(credit + 1e-9), std::floor(queue + 1e-9),
                      std::floor(residual + 1e-9)});
        n = std::max(0.0, n);
        credit -= n;
        credit = std::min(credit, std::max(1.0, sat));
      }
      if (n <= 0) continue;

      in_link.queue_counts[slot] -= n;
      if (in_link.queue_counts[slot] < 1e-12) in_link.queue_counts[slot] = std::max(0.0, in_link.queue_counts[slot]);
      if (cfg_.fractional) {
        if (out_link) {
          InTransitBatch batch;
          batch.arrive_step = s.clock + net_.lag_steps_cache[static_cast<std::size_t>(out_li)];
          batch.count = n;
          out_link->transit.push_back(std::move(batch));
        } else {
          s.exited += n;
        }
      } else {
        int k = static_cast<int>(n);
        InTransitBatch batch;
        if (out_link) {
          batch.arrive_step = s.clock + net_.lag_steps_cache[static_cast<std::size_t>(out_li)];
          batch.count = n;
        }
        for (int v = 0; v < k; ++v) {
          long vid = in_link.queues[slot].front();
          in_link.queues[slot].pop_front();
          VehicleRecord& rec = s.vehicles[static_cast<std::size_t>(vid)];
          // crossing the stop line resets the per-intersection accumulators
          rec.link_delay_s = 0;
          rec.link_travel_s = 0;
          rec.link_stops = 0;
          rec.below_threshold = false;
          if (out_link) {
            batch.vehicle_ids.push_back(vid);
          } else {
            rec.exit_step = s.clock;
            rec.travel_s += cfg_.tau;  // final free-flow step through the line
            rec.speed = net_.link(in_li).free_flow_speed;
            s.exited += 1;
          }
        }
        if (out_link) out_link->transit.push_back(std::move(batch));
      }
      ev.discharges[mov.id] += n;
    }
  }

  // keep transit batches ordered by arrival step after cross-link moves
  for (auto& link : s.links) {
    std::stable_sort(link.transit.begin(), link.transit.end(),
                     [](const InTransitBatch& a, const InTransitBatch& b) {
                       return a.arrive_step < b.arrive_step;
                     });
  }
}

void Simulator::update_trackers(SimState& s) const {
  if (cfg_.fractional) return;
  for (std::size_t li = 0; li < s.links.size(); ++li) {
    const LinkState& link = s.links[li];
    double vstar = net_.link(static_cast<int>(li)).free_flow_speed;
    for (const auto& q : link.queues) {
      for (long vid : q) {
        VehicleRecord& rec = s.vehicles[static_cast<std::size_t>(vid)];
        rec.speed = 0.0;
        rec.travel_s += cfg_.tau;
        rec.link_travel_s += cfg_.tau;
        rec.delay_s += cfg_.tau;
        rec.link_delay_s += cfg_.tau;
        if (!rec.below_threshold) {
          rec.below_threshold = true;
          rec.stops += 1;
          rec.link_stops += 1;
          rec.stops_this_step += 1;
        }
      }
    }
    for (const auto& batch : link.transit) {
      for (long vid : batch.vehicle_ids) {
        VehicleRecord& rec = s.vehicles[static_cast<std::size_t>(vid)];
        rec.speed = vstar;
        rec.below_threshold = false;
        rec.travel_s += cfg_.tau;
        rec.link_travel_s += cfg_.tau;
      }
    }
  }
}

void Simulator::check_conflicts(const SimState& s) const {
  if (net_.conflict_set.empty()) return;
  std::vector<int> green;
  for (std::size_t i = 0; i < s.signals.size(); ++i) {
    if (s.signals[i].mode != InterlockMode::Green || s.signals[i].phase < 0) continue;
    for (int m : net_.phase_movements[static_cast<std::size_t>(s.signals[i].phase)])
      green.push_back(m);
  }
  for (std::size_t a = 0; a < green.size(); ++a)
    for (std::size_t b = a + 1; b < green.size(); ++b)
      if (net_.conflicting(green[a], green[b]))
        throw ConflictViolation("conflicting movements simultaneously green: " +
                                net_.movement(green[a]).id + " / " +
                                net_.movement(green[b]).id);
}

StepEvents Simulator::step(SimState& s, const std::vector<SignalAction>& actions,
                           const std::map<std::string, double>* injected) const {
  StepEvents ev;
  ev.t = s.clock;
  for (auto& v : s.vehicles) v.stops_this_step = 0;

  apply_signals(s, actions);
  check_conflicts(s);
  inject_arrivals(s, ev, injected);
  mature_transit(s);
  discharge(s, ev);
  update_trackers(s);

  ev.phase_of_intersection.resize(s.signals.size());
  ev.mode_of_intersection.resize(s.signals.size());
  for (std::size_t i = 0; i < s.signals.size(); ++i) {
    ev.phase_of_intersection[i] = s.signals[i].phase;
    ev.mode_of_intersection[i] = s.signals[i].mode;
  }
  s.clock += 1;
  return ev;
}

}  // namespace tsc::core
